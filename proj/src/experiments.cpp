/*
 * Copyright 2026 The rdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "dynamics.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace rdfl {
namespace {

constexpr std::uint64_t kMaxRedraws = 1000;
constexpr std::uint64_t kStreamCompare = 0x636f6d70;
constexpr std::uint64_t kStreamAblate = 0x61626c74;
constexpr std::uint64_t kStreamMisreport = 0x6d697372;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> DrawValues(const ValueSpec& spec, std::size_t count,
                               Rng& rng, const char* what) {
  std::vector<double> out;
  switch (spec.kind) {
    case ValueSpec::Kind::kList:
      if (spec.values.size() != count) {
        Fail(ErrorCode::kConfig,
             std::string(what) + " lists " +
                 std::to_string(spec.values.size()) + " values but " +
                 std::to_string(count) + " are needed");
      }
      return spec.values;
    case ValueSpec::Kind::kUniform: {
      // (low, high]: the upper end keeps draws away from zero.
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < count; ++i) {
        out.push_back(spec.high - (spec.high - spec.low) * u(rng));
      }
      return out;
    }
    case ValueSpec::Kind::kGrid: {
      const auto levels = static_cast<std::uint64_t>(
          std::floor(spec.high / spec.step + 1e-9));
      std::uniform_int_distribution<std::uint64_t> pick(1, levels);
      for (std::size_t i = 0; i < count; ++i) {
        out.push_back(static_cast<double>(pick(rng)) * spec.step);
      }
      return out;
    }
  }
  return out;
}

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double MeanOwnerUtility(const SneSolution& s) {
  return Mean(s.profile.utilities->owners);
}

std::string Num(double v) { return FormatDouble(v); }
std::string Int(std::uint64_t v) { return std::to_string(v); }
std::string OwnerLabel(std::size_t n) { return "D" + Int(n + 1); }
std::string CenterLabel(std::size_t m) { return "C" + Int(m + 1); }

std::string Short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Keeps free text inside a single CSV field.
std::string CsvText(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::vector<double> Grid(double lo, double hi, std::size_t steps) {
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(steps - 1);
  }
  return out;
}

template <typename Fn>
auto WithRedraws(Fn&& attempt) {
  for (std::uint64_t draw = 0;; ++draw) {
    try {
      return attempt(draw);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoViableMarket || draw + 1 >= kMaxRedraws) {
        throw;
      }
    }
  }
}

SweepResult NewSweep(const ExperimentConfig& config, std::string name,
                     std::string variable, std::string focus) {
  SweepResult s;
  s.name = std::move(name);
  s.variable = std::move(variable);
  s.focus_name = std::move(focus);
  s.config_hash = config.Hash();
  s.seed = config.seed;
  return s;
}

}  // namespace

MarketDraw DrawMarket(const ExperimentConfig& config, std::size_t owner_count,
                      std::uint64_t seed, std::uint64_t draw) {
  const std::size_t center_count =
      config.centers == 0 ? owner_count : config.centers;
  Rng rng = MakeRng(seed, kStreamMarket, draw);
  const auto f = DrawValues(config.quality, owner_count, rng, "owners.quality");
  const auto sigma =
      DrawValues(config.sigma, center_count, rng, "centers.sigma");
  MarketDraw market;
  for (std::size_t n = 0; n < owner_count; ++n) {
    DataOwner o;
    o.id = static_cast<int>(n + 1);
    o.reported_quality = f[n];
    o.capacity = config.owner_capacity;
    market.owners.push_back(o);
  }
  for (std::size_t m = 0; m < center_count; ++m) {
    ComputeCenter c;
    c.id = static_cast<int>(m + 1);
    c.sigma = sigma[m];
    c.capacity = config.center_capacity;
    market.centers.push_back(c);
  }
  return market;
}

SneSolution SolveStrategy(const MarketDraw& market,
                          const ExperimentConfig& config, StrategyMode mode,
                          std::uint64_t seed, std::uint64_t rng_index) {
  switch (mode) {
    case StrategyMode::kOptimal:
      return SolveSne(market.owners, market.centers, config.market);
    case StrategyMode::kFixedEta:
      return SolveFollowers(market.owners, market.centers, config.market,
                            config.fixed_eta);
    case StrategyMode::kRandomEta: {
      Rng rng = MakeRng(seed, kStreamBaseline, rng_index);
      std::uniform_real_distribution<double> u(config.random_eta_low,
                                               config.RandomEtaHigh());
      return SolveFollowers(market.owners, market.centers, config.market,
                            u(rng));
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unknown strategy mode");
}

SweepResult SweepEta(const ExperimentConfig& config) {
  const MarketDraw market = DrawMarket(config, config.owners, config.seed);
  const SneSolution opt =
      SolveSne(market.owners, market.centers, config.market);
  const double hi =
      config.sweep_max < 0.0 ? 2.0 * opt.profile.eta : config.sweep_max;
  SweepResult out = NewSweep(config, "sweep_eta", "eta", "total_quality");
  for (double eta : Grid(config.sweep_min, hi, config.sweep_steps)) {
    const SneSolution s =
        SolveFollowers(market.owners, market.centers, config.market, eta);
    out.rows.push_back({"qd-rdfl", eta, s.profile.utilities->server,
                        MeanOwnerUtility(s), s.profile.TotalQuality()});
  }
  return out;
}

SweepResult SweepOwner(const ExperimentConfig& config) {
  const MarketDraw market = DrawMarket(config, config.owners, config.seed);
  const SneSolution opt =
      SolveSne(market.owners, market.centers, config.market);
  const std::size_t n = config.sweep_owner - 1;
  const auto& parts = opt.intermediates.participants;
  if (std::find(parts.begin(), parts.end(), n) == parts.end()) {
    Fail(ErrorCode::kInvalidArgument,
         OwnerLabel(n) + " does not participate at equilibrium");
  }
  const double x_star = opt.profile.contributions[n].quantity;
  const double hi = config.sweep_max < 0.0 ? 2.0 * x_star : config.sweep_max;
  const double eta = opt.profile.eta;
  const double f_n = market.owners[n].reported_quality;

  std::vector<double> q;
  for (const auto& c : opt.profile.contributions) q.push_back(c.quality);
  SweepResult out = NewSweep(config, "sweep_owner", "x", "u_owner");
  for (double x : Grid(config.sweep_min, hi, config.sweep_steps)) {
    q[n] = f_n * x;
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    double sum_u = 0.0;
    double u_n = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q[k] <= 0.0) continue;
      const double u =
          UtilityOwner(k, q, market.owners, eta, config.market);
      sum_u += u;
      if (k == n) u_n = u;
    }
    out.rows.push_back({OwnerLabel(n), x,
                        UtilityServer(eta, total, config.market),
                        sum_u / static_cast<double>(q.size()), u_n});
  }
  return out;
}

SweepResult Deviate(const ExperimentConfig& config) {
  const MarketDraw base = DrawMarket(config, config.owners, config.seed);
  const auto ratios =
      Grid(config.deviation_min, config.deviation_max, config.deviation_steps);
  SweepResult out = NewSweep(config, "deviation", "ratio", "u_deviator");

  auto point = [&](const std::vector<std::size_t>& deviators, double ratio,
                   const std::string& series) {
    MarketDraw m = base;
    for (std::size_t n : deviators) m.owners[n].reported_quality *= 1.0 + ratio;
    try {
      const SneSolution s = SolveSne(m.owners, m.centers, config.market);
      out.rows.push_back({series, ratio, s.profile.utilities->server,
                          MeanOwnerUtility(s),
                          s.profile.utilities->owners[deviators.front()]});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoViableMarket) throw;
      out.rows.push_back({series, ratio, kNaN, kNaN, kNaN});
    }
  };

  std::vector<std::size_t> singles = config.deviation_owners;
  if (singles.empty() && config.deviation_fractions.empty()) singles = {1};
  for (std::size_t one_based : singles) {
    for (double r : ratios) point({one_based - 1}, r, OwnerLabel(one_based - 1));
  }
  for (double frac : config.deviation_fractions) {
    const auto k = static_cast<std::size_t>(
        std::ceil(frac * static_cast<double>(config.owners) - 1e-9));
    std::vector<std::size_t> group(std::max<std::size_t>(k, 1));
    std::iota(group.begin(), group.end(), 0);
    for (double r : ratios) point(group, r, "frac=" + Short(frac));
  }
  return out;
}

std::vector<CompareRun> Compare(const ExperimentConfig& config) {
  std::vector<CompareRun> runs;
  for (std::size_t n : config.sweep_counts) {
    for (std::size_t r = 0; r < config.runs; ++r) {
      CompareRun run;
      run.owners = n;
      run.run = r;
      run.seed = DeriveSeed(config.seed, kStreamCompare + n, r);
      runs.push_back(run);
    }
  }
  ParallelFor(runs.size(), config.threads, [&](std::size_t i) {
    CompareRun& run = runs[i];
    WithRedraws([&](std::uint64_t draw) {
      const MarketDraw market = DrawMarket(config, run.owners, run.seed, draw);
      const StrategyMode modes[3] = {StrategyMode::kOptimal,
                                     StrategyMode::kFixedEta,
                                     StrategyMode::kRandomEta};
      for (int k = 0; k < 3; ++k) {
        const SneSolution s =
            SolveStrategy(market, config, modes[k], run.seed, draw);
        run.eta[k] = s.profile.eta;
        run.u_server[k] = s.profile.utilities->server;
        run.mean_u_owner[k] = MeanOwnerUtility(s);
      }
      run.redraws = draw;
      return 0;
    });
  });
  return runs;
}

SimulationSetup PrepareSimulation(const ExperimentConfig& config,
                                  std::uint64_t seed, std::uint64_t draw) {
  SimulationSetup setup;
  setup.market = DrawMarket(config, config.owners, seed, draw);
  const auto& tc = config.trainer;
  const std::size_t n_owners = setup.market.owners.size();
  for (const auto& o : setup.market.owners) {
    setup.true_quality.push_back(o.reported_quality);
  }

  // Pools carry noise matching each owner's true quality: the injected MSE
  // is noise^2, so 1 - MSE estimates f_n.
  for (std::size_t n = 0; n < n_owners; ++n) {
    const DataOwner& owner = setup.market.owners[n];
    std::size_t pool = config.pool_samples;
    if (pool == 0) {
      pool = std::isfinite(owner.capacity)
                 ? static_cast<std::size_t>(std::max(
                       1.0, std::floor(owner.capacity * tc.samples_per_unit)))
                 : 1000;
    }
    const double noise = std::sqrt(std::max(0.0, 1.0 - owner.reported_quality));
    setup.pools.push_back(GenerateOwnerData(seed, n, owner, noise, pool,
                                            tc.dims, tc.classes));
    setup.measured.push_back(setup.pools.back().initial_quality);
  }

  if (!config.deviation_owners.empty()) {
    for (std::size_t k : config.deviation_owners) {
      setup.misreporters.push_back(k - 1);
    }
  } else if (config.deviation_fraction > 0.0) {
    // A seeded random subset, so misreporters are not systematically the
    // owners the market would prune anyway.
    const auto k = static_cast<std::size_t>(std::ceil(
        config.deviation_fraction * static_cast<double>(n_owners) - 1e-9));
    std::vector<std::size_t> order(n_owners);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = MakeRng(seed, kStreamMisreport, draw);
    std::shuffle(order.begin(), order.end(), rng);
    setup.misreporters.assign(order.begin(),
                              order.begin() + static_cast<std::ptrdiff_t>(
                                                  std::min(k, n_owners)));
  }
  std::sort(setup.misreporters.begin(), setup.misreporters.end());

  for (std::size_t n = 0; n < n_owners; ++n) {
    double reported = std::max(setup.measured[n], kQualityFloor);
    if (std::binary_search(setup.misreporters.begin(),
                           setup.misreporters.end(), n)) {
      reported *= 1.0 + config.deviation_ratio;
    }
    setup.market.owners[n].reported_quality = reported;
  }

  setup.solution =
      SolveStrategy(setup.market, config, config.strategy, seed, draw);
  setup.matching = MatchSolution(setup.solution);
  setup.validation = GenerateValidationData(seed, tc.validation_samples,
                                            tc.dims, tc.classes);
  return setup;
}

SimulationResult Simulate(const ExperimentConfig& config) {
  SimulationResult result;
  result.setup = WithRedraws([&](std::uint64_t draw) {
    return PrepareSimulation(config, config.seed, draw);
  });
  const auto& s = result.setup;
  result.history = RunFederated(s.solution, s.matching, s.pools,
                                &s.validation, config.trainer, config.seed);
  return result;
}

std::vector<AblationPair> Ablate(const ExperimentConfig& config) {
  std::vector<AblationPair> pairs(config.runs);
  ParallelFor(pairs.size(), config.threads, [&](std::size_t r) {
    AblationPair& pair = pairs[r];
    pair.seed = DeriveSeed(config.seed, kStreamAblate, r);
    std::uint64_t redraws = 0;
    const SimulationSetup setup = WithRedraws([&](std::uint64_t draw) {
      redraws = draw;
      return PrepareSimulation(config, pair.seed, draw);
    });
    pair.redraws = redraws;
    TrainerConfig adjusted = config.trainer;
    adjusted.dynamic_adjustment = true;
    TrainerConfig fixed = config.trainer;
    fixed.dynamic_adjustment = false;
    const RunHistory a =
        RunFederated(setup.solution, setup.matching, setup.pools,
                     &setup.validation, adjusted, pair.seed);
    const RunHistory b =
        RunFederated(setup.solution, setup.matching, setup.pools,
                     &setup.validation, fixed, pair.seed);
    for (const auto& rec : a.rounds) pair.adjusted_loss.push_back(rec.global_loss);
    for (const auto& rec : b.rounds) pair.static_loss.push_back(rec.global_loss);
    pair.adjustments = a.adjustments;
  });
  return pairs;
}

double SignTestPValue(std::size_t wins, std::size_t trials) {
  if (wins == 0) return 1.0;
  double p = 0.0;
  const double n = static_cast<double>(trials);
  for (std::size_t k = wins; k <= trials; ++k) {
    const double kk = static_cast<double>(k);
    p += std::exp(std::lgamma(n + 1) - std::lgamma(kk + 1) -
                  std::lgamma(n - kk + 1) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

namespace {

Table KeyValueTable(std::string name,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
  Table t;
  t.name = std::move(name);
  t.header = {"key", "value"};
  for (const auto& [k, v] : kv) t.AddRow({k, v});
  return t;
}

std::string FormatSummary(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + ": " + v + "\n";
  return out;
}

CommandOutput CmdSolve(const ExperimentConfig& config) {
  const MarketDraw market = DrawMarket(config, config.owners, config.seed);
  const SneSolution sol =
      SolveSne(market.owners, market.centers, config.market);
  const Matching matching = MatchSolution(sol);
  const auto realized = RealizedUndertakings(matching, sol.profile,
                                             sol.centers.size());
  const VerificationReport verify = VerifySne(sol);
  const auto& u = *sol.profile.utilities;

  CommandOutput out;
  Table owners;
  owners.name = "owners";
  owners.header = {"owner", "reported_quality", "retained", "drop_reason",
                   "response_coeff", "q", "x", "u_owner", "center"};
  for (std::size_t n = 0; n < sol.owners.size(); ++n) {
    std::string reason;
    for (const auto& d : sol.dropped_owners) {
      if (d.owner == n) reason = DropReasonName(d.reason);
    }
    const auto center = matching.CenterOf(n);
    owners.AddRow({OwnerLabel(n), Num(sol.owners[n].reported_quality),
                   reason.empty() ? "1" : "0", reason.empty() ? "-" : reason,
                   Num(sol.intermediates.response_coeffs[n]),
                   Num(sol.profile.contributions[n].quality),
                   Num(sol.profile.contributions[n].quantity),
                   Num(u.owners[n]), center ? CenterLabel(*center) : "-"});
  }
  Table centers;
  centers.name = "centers";
  centers.header = {"center", "sigma", "d", "d_realized", "u_center", "owner"};
  const double payment = config.market.rho * std::accumulate(
      sol.profile.contributions.begin(), sol.profile.contributions.end(), 0.0,
      [](double acc, const OwnerContribution& c) { return acc + c.quantity; });
  for (std::size_t m = 0; m < sol.centers.size(); ++m) {
    const auto owner = matching.OwnerOf(m);
    double u_realized = 0.0;
    if (realized[m] > 0.0) {
      u_realized = UtilityCenter(m, realized, sol.centers, payment,
                                 config.market);
    }
    centers.AddRow({CenterLabel(m), Num(sol.centers[m].sigma),
                    Num(sol.profile.undertakings[m]), Num(realized[m]),
                    Num(u_realized), owner ? OwnerLabel(*owner) : "-"});
  }

  std::vector<std::pair<std::string, std::string>> kv = {
      {"eta", Num(sol.profile.eta)},
      {"u_server", Num(u.server)},
      {"sum_u_owner", Num(std::accumulate(u.owners.begin(), u.owners.end(), 0.0))},
      {"sum_u_center",
       Num(std::accumulate(u.centers.begin(), u.centers.end(), 0.0))},
      {"global_utility", Num(u.global)},
      {"total_quality", Num(sol.profile.TotalQuality())},
      {"sum_response", Num(sol.intermediates.sum_response)},
      {"participants", Int(sol.intermediates.participants.size())},
      {"matched_pairs", Int(matching.matched_count)},
      {"verify_max_gain", Num(verify.MaxGain())},
      {"verify_passed", verify.Passed() ? "1" : "0"},
  };
  out.summary = FormatSummary(kv);
  out.tables.push_back(std::move(owners));
  out.tables.push_back(std::move(centers));
  out.tables.push_back(KeyValueTable("solution", kv));
  return out;
}

CommandOutput CmdMatch(const ExperimentConfig& config) {
  std::vector<double> x;
  std::vector<double> d;
  std::vector<ComputeCenter> centers;
  std::vector<std::size_t> owner_index;
  if (!config.match_x.empty()) {
    x = config.match_x;
    d = config.match_d;
    for (std::size_t m = 0; m < config.match_sigma.size(); ++m) {
      ComputeCenter c;
      c.id = static_cast<int>(m + 1);
      c.sigma = config.match_sigma[m];
      centers.push_back(c);
    }
    owner_index.resize(x.size());
    std::iota(owner_index.begin(), owner_index.end(), 0);
  } else {
    const MarketDraw market = DrawMarket(config, config.owners, config.seed);
    const SneSolution sol =
        SolveSne(market.owners, market.centers, config.market);
    centers = sol.centers;
    d = sol.profile.undertakings;
    owner_index = sol.intermediates.participants;
    for (std::size_t n : owner_index) {
      x.push_back(sol.profile.contributions[n].quantity);
    }
  }
  const PreferenceTables prefs = BuildPreferences(x, centers, d);
  const Matching matching = GaleShapley(prefs);
  const auto blocking = FindBlockingPairs(matching, prefs);

  // Realized center utility: U_m = lambda rho x - epsilon sigma x for the
  // owner it serves, with d_m = x_n.
  Table pairs;
  pairs.name = "matching";
  pairs.header = {"owner", "center", "sigma", "d", "x", "u_center"};
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto m = matching.owner_center[k];
    if (!m) {
      pairs.AddRow({OwnerLabel(owner_index[k]), "-", "nan", "nan", Num(x[k]),
                    "nan"});
      continue;
    }
    const double sigma = centers[*m].sigma;
    const double u = (config.market.lambda * config.market.rho -
                      config.market.epsilon * sigma) * x[k];
    pairs.AddRow({OwnerLabel(owner_index[k]), CenterLabel(*m), Num(sigma),
                  Num(d[*m]), Num(x[k]), Num(u)});
  }
  std::vector<std::pair<std::string, std::string>> kv = {
      {"owners", Int(x.size())},
      {"centers", Int(centers.size())},
      {"matched_pairs", Int(matching.matched_count)},
      {"blocking_pairs", Int(blocking.size())},
  };
  CommandOutput out;
  out.summary = FormatSummary(kv);
  for (const auto& row : pairs.rows) {
    out.summary += row[0] + " <-> " + row[1] + "\n";
  }
  out.tables.push_back(std::move(pairs));
  out.tables.push_back(KeyValueTable("match_summary", kv));
  return out;
}

CommandOutput CmdSimulate(const ExperimentConfig& config) {
  const SimulationResult sim = Simulate(config);
  const RunHistory& h = sim.history;
  CommandOutput out;

  Table rounds;
  rounds.name = "rounds";
  rounds.header = {"round", "center", "owner", "samples", "loss_start",
                   "loss_end", "quality"};
  Table global;
  global.name = "global_loss";
  global.header = {"round", "global_loss"};
  for (const auto& r : h.rounds) {
    for (const auto& c : r.centers) {
      rounds.AddRow({Int(r.round), CenterLabel(c.center), OwnerLabel(c.owner),
                     Int(c.samples), Num(c.loss_start), Num(c.loss_end),
                     Num(c.quality)});
    }
    global.AddRow({Int(r.round), Num(r.global_loss)});
  }
  Table events;
  events.name = "events";
  events.header = {"round", "event"};
  for (const auto& e : h.events) events.AddRow({Int(e.round), CsvText(e.message)});
  Table payments;
  payments.name = "payments";
  payments.header = {"round", "payer", "payee", "amount"};
  for (const auto& p : h.ledger.entries()) {
    payments.AddRow({Int(p.round), OwnerLabel(p.payer), CenterLabel(p.payee),
                     Num(p.amount)});
  }
  Table owners;
  owners.name = "owners";
  owners.header = {"owner", "true_quality", "measured_quality",
                   "reported_quality", "misreport", "x_initial", "x_final",
                   "samples"};
  const auto& s = sim.setup;
  for (std::size_t n = 0; n < s.market.owners.size(); ++n) {
    const bool mis = std::binary_search(s.misreporters.begin(),
                                        s.misreporters.end(), n);
    owners.AddRow({OwnerLabel(n), Num(s.true_quality[n]),
                   Num(s.measured[n]), Num(s.market.owners[n].reported_quality),
                   mis ? "1" : "0",
                   Num(h.initial_solution.profile.contributions[n].quantity),
                   Num(h.final_solution.profile.contributions[n].quantity),
                   Int(h.samples[n])});
  }

  std::vector<std::pair<std::string, std::string>> kv = {
      {"strategy", StrategyModeName(config.strategy)},
      {"eta_initial", Num(h.initial_solution.profile.eta)},
      {"eta_final", Num(h.final_solution.profile.eta)},
      {"rounds", Int(h.rounds.size())},
      {"adjustments", Int(h.adjustments)},
      {"final_global_loss", Num(h.FinalGlobalLoss())},
      {"ledger_total", Num(h.ledger.Total())},
  };
  out.summary = FormatSummary(kv);
  for (const auto& e : h.events) {
    out.summary += "[round " + Int(e.round) + "] " + e.message + "\n";
  }
  SweepResult curve = NewSweep(config, "global_loss_curve", "round",
                               "global_loss");
  for (const auto& r : h.rounds) {
    curve.rows.push_back({"global", static_cast<double>(r.round), kNaN, kNaN,
                          r.global_loss});
  }
  out.tables.push_back(std::move(owners));
  out.tables.push_back(std::move(rounds));
  out.tables.push_back(std::move(global));
  out.tables.push_back(std::move(events));
  out.tables.push_back(std::move(payments));
  out.tables.push_back(KeyValueTable("simulation", kv));
  if (config.export_datasets) {
    Table data;
    data.name = "datasets";
    std::ostringstream csv;
    WriteDatasetCsv(csv, s.pools);
    std::istringstream in(csv.str());
    data = Table::ReadCsv(in, "datasets");
    out.tables.push_back(std::move(data));
  }
  out.sweeps.push_back(std::move(curve));
  return out;
}

CommandOutput SweepOutput(SweepResult sweep, const std::string& headline) {
  CommandOutput out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    if (sweep.rows[i].focus > sweep.rows[best].focus) best = i;
  }
  if (!sweep.rows.empty()) {
    const auto& r = sweep.rows[best];
    out.summary = headline + " at " + sweep.variable + " = " + Short(r.x) +
                  " (u_server " + Short(r.u_server) + ", " + sweep.focus_name +
                  " " + Short(r.focus) + ")\n";
  }
  out.summary += "rows: " + Int(sweep.rows.size()) + "\n";
  out.tables.push_back(sweep.ToTable());
  out.sweeps.push_back(std::move(sweep));
  return out;
}

CommandOutput CmdSweepEta(const ExperimentConfig& config) {
  SweepResult s = SweepEta(config);
  // Pick the best U_s explicitly for the headline.
  CommandOutput out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (s.rows[i].u_server > s.rows[best].u_server) best = i;
  }
  out.summary = "max u_server " + Short(s.rows[best].u_server) +
                " at eta = " + Short(s.rows[best].x) + "\nrows: " +
                Int(s.rows.size()) + "\n";
  out.tables.push_back(s.ToTable());
  out.sweeps.push_back(std::move(s));
  return out;
}

CommandOutput CmdSweepOwner(const ExperimentConfig& config) {
  return SweepOutput(SweepOwner(config), "max u_owner");
}

CommandOutput CmdDeviate(const ExperimentConfig& config) {
  SweepResult s = Deviate(config);
  CommandOutput out;
  out.summary = "rows: " + Int(s.rows.size()) + "\n";
  std::string last;
  for (const auto& r : s.rows) {
    if (r.series != last) {
      out.summary += r.series + ":";
      last = r.series;
    }
    out.summary += " " + Short(r.x) + "->" + Short(r.focus);
    if (&r == &s.rows.back() || (&r + 1)->series != r.series) out.summary += "\n";
  }
  out.tables.push_back(s.ToTable());
  out.sweeps.push_back(std::move(s));
  return out;
}

CommandOutput CmdCompare(const ExperimentConfig& config) {
  const auto runs = Compare(config);
  static const char* kNames[3] = {"qd-rdfl", "fixed-eta", "random-eta"};
  Table t;
  t.name = "compare_runs";
  t.header = {"owners", "run", "seed", "redraws"};
  for (const char* name : kNames) {
    t.header.push_back(std::string("eta_") + name);
    t.header.push_back(std::string("u_server_") + name);
    t.header.push_back(std::string("mean_u_owner_") + name);
  }
  for (const auto& r : runs) {
    std::vector<std::string> row = {Int(r.owners), Int(r.run), Int(r.seed),
                                    Int(r.redraws)};
    for (int k = 0; k < 3; ++k) {
      row.push_back(Num(r.eta[k]));
      row.push_back(Num(r.u_server[k]));
      row.push_back(Num(r.mean_u_owner[k]));
    }
    t.AddRow(std::move(row));
  }

  // Per N: means, plus the share of runs where qd-rdfl is at least as good.
  SweepResult us = NewSweep(config, "compare", "owners", "qd_share_u_server");
  SweepResult un =
      NewSweep(config, "compare_owner", "owners", "qd_share_mean_u_owner");
  std::string summary;
  for (std::size_t n : config.sweep_counts) {
    for (int k = 0; k < 3; ++k) {
      double s_sum = 0, u_sum = 0, s_win = 0, u_win = 0, count = 0;
      for (const auto& r : runs) {
        if (r.owners != n) continue;
        s_sum += r.u_server[k];
        u_sum += r.mean_u_owner[k];
        s_win += r.u_server[0] >= r.u_server[k] ? 1 : 0;
        u_win += r.mean_u_owner[0] >= r.mean_u_owner[k] ? 1 : 0;
        count += 1;
      }
      us.rows.push_back({kNames[k], static_cast<double>(n), s_sum / count,
                         u_sum / count, s_win / count});
      un.rows.push_back({kNames[k], static_cast<double>(n), s_sum / count,
                         u_sum / count, u_win / count});
      summary += "N=" + Int(n) + " " + kNames[k] + ": mean u_server " +
                 Short(s_sum / count) + ", mean u_owner " +
                 Short(u_sum / count);
      if (k > 0) {
        summary += ", qd-rdfl >= in " + Short(100 * s_win / count) +
                   "% (u_server) / " + Short(100 * u_win / count) +
                   "% (u_owner)";
      }
      summary += "\n";
    }
  }
  CommandOutput out;
  out.summary = summary;
  out.tables.push_back(std::move(t));
  out.tables.push_back(us.ToTable());
  out.tables.push_back(un.ToTable());
  out.sweeps.push_back(std::move(us));
  out.sweeps.push_back(std::move(un));
  return out;
}

CommandOutput CmdAblate(const ExperimentConfig& config) {
  const auto pairs = Ablate(config);
  Table runs;
  runs.name = "ablation_runs";
  runs.header = {"run", "seed", "redraws", "adjustments", "final_adjusted",
                 "final_static", "adjusted_not_worse"};
  Table rounds;
  rounds.name = "ablation_rounds";
  rounds.header = {"run", "round", "loss_adjusted", "loss_static"};
  std::size_t wins = 0;
  SweepResult curve =
      NewSweep(config, "ablation", "round", "mean_global_loss");
  std::vector<double> mean_a(config.trainer.rounds, 0.0);
  std::vector<double> mean_s(config.trainer.rounds, 0.0);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& p = pairs[r];
    const bool win = p.AdjustedFinal() <= p.StaticFinal();
    wins += win ? 1 : 0;
    runs.AddRow({Int(r), Int(p.seed), Int(p.redraws), Int(p.adjustments),
                 Num(p.AdjustedFinal()), Num(p.StaticFinal()),
                 win ? "1" : "0"});
    for (std::size_t t = 0; t < p.adjusted_loss.size(); ++t) {
      rounds.AddRow({Int(r), Int(t + 1), Num(p.adjusted_loss[t]),
                     Num(p.static_loss[t])});
      mean_a[t] += p.adjusted_loss[t] / static_cast<double>(pairs.size());
      mean_s[t] += p.static_loss[t] / static_cast<double>(pairs.size());
    }
  }
  for (std::size_t t = 0; t < mean_a.size(); ++t) {
    curve.rows.push_back({"adjusted", static_cast<double>(t + 1), kNaN, kNaN,
                          mean_a[t]});
  }
  for (std::size_t t = 0; t < mean_s.size(); ++t) {
    curve.rows.push_back({"static", static_cast<double>(t + 1), kNaN, kNaN,
                          mean_s[t]});
  }
  std::vector<std::pair<std::string, std::string>> kv = {
      {"pairs", Int(pairs.size())},
      {"adjusted_not_worse", Int(wins)},
      {"share", Num(pairs.empty() ? 0.0
                                  : static_cast<double>(wins) /
                                        static_cast<double>(pairs.size()))},
      {"sign_test_p", Num(SignTestPValue(wins, pairs.size()))},
  };
  CommandOutput out;
  out.summary = FormatSummary(kv);
  out.tables.push_back(std::move(runs));
  out.tables.push_back(std::move(rounds));
  out.tables.push_back(KeyValueTable("ablation", kv));
  out.sweeps.push_back(std::move(curve));
  return out;
}

}  // namespace

const std::vector<std::string>& CommandNames() {
  static const std::vector<std::string> names = {
      "solve",  "match",   "simulate", "sweep-eta",
      "sweep-owner", "deviate", "compare",  "ablate"};
  return names;
}

CommandOutput RunCommand(std::string_view command,
                         const ExperimentConfig& config) {
  config.Validate();
  if (command == "solve") return CmdSolve(config);
  if (command == "match") return CmdMatch(config);
  if (command == "simulate") return CmdSimulate(config);
  if (command == "sweep-eta") return CmdSweepEta(config);
  if (command == "sweep-owner") return CmdSweepOwner(config);
  if (command == "deviate") return CmdDeviate(config);
  if (command == "compare") return CmdCompare(config);
  if (command == "ablate") return CmdAblate(config);
  Fail(ErrorCode::kInvalidArgument,
       "unknown command '" + std::string(command) + "'");
}

}  // namespace rdfl

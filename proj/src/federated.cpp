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

#include "federated.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace rdfl {
namespace {

std::string Label(char prefix, std::size_t index) {
  return std::string(1, prefix) + std::to_string(index + 1);
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct OwnerState {
  std::vector<std::size_t> order;  // pool rows in transfer order
  std::size_t used = 0;            // rows transferred so far
  bool active = false;
  std::size_t center = 0;
  OwnerDataset data;               // the transferred rows
};

}  // namespace

RunHistory RunFederated(const SneSolution& solution, const Matching& matching,
                        std::span<const OwnerDataset> pools,
                        const OwnerDataset* validation,
                        const TrainerConfig& config, std::uint64_t seed) {
  config.Validate();
  Require(pools.size() == solution.owners.size(), ErrorCode::kInvalidArgument,
          "one sample pool per owner is required");
  if (config.trainer == TrainerKind::kGradient) {
    Require(validation != nullptr, ErrorCode::kInvalidArgument,
            "the gradient trainer needs a validation set");
  }

  RunHistory history;
  history.initial_solution = solution;
  history.matching = matching;
  SneSolution current = solution;
  current.profile.matching = matching;

  auto sample_count = [&](std::size_t n, double quantity, std::size_t round) {
    const double wanted = std::floor(quantity * config.samples_per_unit);
    std::size_t count = wanted < 1.0 ? 1 : static_cast<std::size_t>(wanted);
    if (count > pools[n].size()) {
      history.events.push_back(
          {round, Label('D', n) + " pool exhausted: " + std::to_string(count) +
                  " samples requested, " + std::to_string(pools[n].size()) +
                  " available"});
      count = pools[n].size();
    }
    return count;
  };

  // Seeded transfer of x_n* samples along the matching.
  std::vector<OwnerState> owners(pools.size());
  for (std::size_t n : solution.intermediates.participants) {
    const auto center = matching.CenterOf(n);
    if (!center) {
      history.events.push_back({0, Label('D', n) + " has no matched center"});
      continue;
    }
    OwnerState& s = owners[n];
    Require(pools[n].size() > 0, ErrorCode::kInvalidArgument,
            "owner sample pool is empty");
    s.order.resize(pools[n].size());
    std::iota(s.order.begin(), s.order.end(), 0);
    Rng rng = MakeRng(seed, kStreamSubsample, n);
    std::shuffle(s.order.begin(), s.order.end(), rng);
    s.used = sample_count(n, solution.profile.contributions[n].quantity, 0);
    s.active = true;
    s.center = *center;
    s.data = Subset(pools[n], std::span(s.order).first(s.used));
    history.events.push_back({0, "secure transfer " + Label('D', n) + " -> " +
                                     Label('C', *center) + ": " +
                                     std::to_string(s.used) + " samples"});
  }

  const std::size_t dim = ModelDimension(config.dims, config.classes);
  ModelState global{std::vector<double>(dim, 0.0), 0};

  for (std::size_t round = 1; round <= config.rounds; ++round) {
    std::vector<std::size_t> active;
    for (std::size_t n = 0; n < owners.size(); ++n) {
      if (owners[n].active) active.push_back(n);
    }
    Require(!active.empty(), ErrorCode::kNoViableMarket,
            "no matched owner is left to train");
    std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
      return owners[a].center < owners[b].center;
    });

    std::vector<ClientResult> results(active.size());
    ParallelFor(active.size(), config.threads, [&](std::size_t i) {
      results[i] = ClientUpdate(owners[active[i]].data, global, config);
    });

    RoundRecord record;
    record.round = round;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t n = active[i];
      CenterRecord c;
      c.center = owners[n].center;
      c.owner = n;
      c.samples = owners[n].used;
      c.w = std::move(results[i].w);
      c.loss_start = results[i].loss_start;
      c.loss_end = results[i].loss_end;
      c.quality = results[i].quality;
      record.centers.push_back(std::move(c));
    }

    if (round == config.adjust_round && config.dynamic_adjustment) {
      const auto assessment = EvaluateQuality(record, current.params.xi);
      try {
        Readjustment adj = Readjust(current, assessment, matching, round);
        history.events.push_back(
            {round, "readjustment: eta " + Num(current.profile.eta) + " -> " +
                        Num(adj.solution.profile.eta)});
        for (std::size_t n : adj.excluded_owners) {
          owners[n].active = false;
          history.events.push_back(
              {round, Label('D', n) + " excluded below the quality threshold"});
        }
        for (const auto& p : adj.payments) {
          OwnerState& s = owners[p.payer];
          const std::size_t wanted = sample_count(
              p.payer, adj.solution.profile.contributions[p.payer].quantity,
              round);
          if (wanted > s.used) {
            s.used = wanted;
            s.data = Subset(pools[p.payer], std::span(s.order).first(s.used));
          }
          history.events.push_back(
              {round, Label('D', p.payer) + " pays " + Num(p.amount) +
                          " additional training fee to " +
                          Label('C', p.payee) + "; now " +
                          std::to_string(s.used) + " samples"});
        }
        history.ledger.Append(adj.payments);
        record.payments = adj.payments;
        current = std::move(adj.solution);
        ++history.adjustments;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoViableMarket) throw;
        history.events.push_back(
            {round, std::string("readjustment skipped: ") + e.what()});
      }
    }

    std::vector<std::vector<double>> locals;
    std::vector<double> quantities;
    double loss_sum = 0.0;
    for (const auto& c : record.centers) {
      if (!owners[c.owner].active) continue;
      locals.push_back(c.w);
      quantities.push_back(static_cast<double>(c.samples));
      loss_sum += c.loss_end;
    }
    global = Aggregate(locals, quantities, config.aggregation, round);
    if (config.trainer == TrainerKind::kGradient) {
      record.global_loss = SoftmaxLoss(global.w, *validation);
    } else {
      record.global_loss = loss_sum / static_cast<double>(locals.size());
    }
    history.rounds.push_back(std::move(record));
  }

  history.final_model = std::move(global);
  history.final_solution = std::move(current);
  history.samples.resize(owners.size(), 0);
  for (std::size_t n = 0; n < owners.size(); ++n) {
    history.samples[n] = owners[n].used;
  }
  return history;
}

}  // namespace rdfl

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

#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "error.hpp"

namespace rdfl {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           const char* expected) {
  Fail(ErrorCode::kConfig, "invalid value '" + std::string(value) +
                               "' for " + std::string(key) + ": expected " +
                               expected);
}

double ToDouble(std::string_view key, std::string_view text) {
  text = Trim(text);
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    BadValue(key, text, "a number");
  }
  return v;
}

std::uint64_t ToU64(std::string_view key, std::string_view text) {
  text = Trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    BadValue(key, text, "a non-negative integer");
  }
  return v;
}

std::size_t ToSize(std::string_view key, std::string_view text) {
  return static_cast<std::size_t>(ToU64(key, text));
}

bool ToBool(std::string_view key, std::string_view text) {
  text = Trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    return false;
  }
  BadValue(key, text, "true or false");
}

std::vector<std::string_view> Split(std::string_view text) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto comma = text.find(',');
    parts.push_back(Trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return parts;
}

std::vector<double> ToDoubles(std::string_view key, std::string_view text) {
  std::vector<double> out;
  if (Trim(text).empty()) return out;
  for (auto part : Split(text)) out.push_back(ToDouble(key, part));
  return out;
}

std::vector<std::size_t> ToSizes(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  if (Trim(text).empty()) return out;
  for (auto part : Split(text)) out.push_back(ToSize(key, part));
  return out;
}

// "uniform", "uniform(lo, hi)", "grid", "grid(step, hi)" or a number list.
ValueSpec ToValueSpec(std::string_view key, std::string_view text) {
  text = Trim(text);
  ValueSpec spec;
  auto args = [&](std::string_view name) -> std::optional<std::string_view> {
    if (text.substr(0, name.size()) != name) return std::nullopt;
    auto rest = Trim(text.substr(name.size()));
    if (rest.empty()) return std::string_view{};
    if (rest.front() != '(' || rest.back() != ')') {
      BadValue(key, text, "name(a, b)");
    }
    return rest.substr(1, rest.size() - 2);
  };
  if (auto a = args("uniform")) {
    spec.kind = ValueSpec::Kind::kUniform;
    if (!a->empty()) {
      const auto v = ToDoubles(key, *a);
      if (v.size() != 2) BadValue(key, text, "uniform(low, high)");
      spec.low = v[0];
      spec.high = v[1];
    }
    return spec;
  }
  if (auto a = args("grid")) {
    spec.kind = ValueSpec::Kind::kGrid;
    if (!a->empty()) {
      const auto v = ToDoubles(key, *a);
      if (v.size() != 2) BadValue(key, text, "grid(step, high)");
      spec.step = v[0];
      spec.high = v[1];
    }
    return spec;
  }
  spec.kind = ValueSpec::Kind::kList;
  spec.values = ToDoubles(key, text);
  if (spec.values.empty()) BadValue(key, text, "a list or distribution");
  return spec;
}

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string Join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += Num(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string SpecText(const ValueSpec& spec) {
  switch (spec.kind) {
    case ValueSpec::Kind::kList:
      return Join(spec.values);
    case ValueSpec::Kind::kUniform:
      return "uniform(" + Num(spec.low) + ", " + Num(spec.high) + ")";
    case ValueSpec::Kind::kGrid:
      return "grid(" + Num(spec.step) + ", " + Num(spec.high) + ")";
  }
  return {};
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define RDFL_DOUBLE(name, member)                                             \
  Field {                                                                     \
    name, [](ExperimentConfig& c, std::string_view v) {                       \
      c.member = ToDouble(name, v);                                           \
    },                                                                        \
        [](const ExperimentConfig& c) { return Num(c.member); }               \
  }
#define RDFL_SIZE(name, member)                                               \
  Field {                                                                     \
    name, [](ExperimentConfig& c, std::string_view v) {                       \
      c.member = ToSize(name, v);                                             \
    },                                                                        \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }    \
  }
#define RDFL_BOOL(name, member)                                               \
  Field {                                                                     \
    name, [](ExperimentConfig& c, std::string_view v) {                       \
      c.member = ToBool(name, v);                                             \
    },                                                                        \
        [](const ExperimentConfig& c) {                                       \
          return std::string(c.member ? "true" : "false");                    \
        }                                                                     \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"scenario",
       [](ExperimentConfig& c, std::string_view v) {
         c.scenario = std::string(Trim(v));
       },
       [](const ExperimentConfig& c) { return c.scenario; }},
      {"seed",
       [](ExperimentConfig& c, std::string_view v) {
         c.seed = ToU64("seed", v);
         c.has_seed = true;
       },
       [](const ExperimentConfig& c) {
         return c.has_seed ? std::to_string(c.seed) : std::string("unset");
       }},
      RDFL_SIZE("threads", threads),
      RDFL_SIZE("owners.count", owners),
      {"owners.quality",
       [](ExperimentConfig& c, std::string_view v) {
         c.quality = ToValueSpec("owners.quality", v);
       },
       [](const ExperimentConfig& c) { return SpecText(c.quality); }},
      RDFL_DOUBLE("owners.capacity", owner_capacity),
      RDFL_SIZE("owners.pool_samples", pool_samples),
      RDFL_SIZE("centers.count", centers),
      {"centers.sigma",
       [](ExperimentConfig& c, std::string_view v) {
         c.sigma = ToValueSpec("centers.sigma", v);
       },
       [](const ExperimentConfig& c) { return SpecText(c.sigma); }},
      RDFL_DOUBLE("centers.capacity", center_capacity),
      RDFL_DOUBLE("market.lambda", market.lambda),
      RDFL_DOUBLE("market.rho", market.rho),
      RDFL_DOUBLE("market.epsilon", market.epsilon),
      RDFL_DOUBLE("market.alpha", market.alpha),
      RDFL_DOUBLE("market.xi", market.xi),
      {"trainer.kind",
       [](ExperimentConfig& c, std::string_view v) {
         v = Trim(v);
         if (v == "analytic") {
           c.trainer.trainer = TrainerKind::kAnalytic;
         } else if (v == "gradient") {
           c.trainer.trainer = TrainerKind::kGradient;
         } else {
           BadValue("trainer.kind", v, "analytic or gradient");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.trainer.trainer == TrainerKind::kAnalytic
                                ? "analytic"
                                : "gradient");
       }},
      RDFL_SIZE("trainer.rounds", trainer.rounds),
      RDFL_SIZE("trainer.local_epochs", trainer.local_epochs),
      RDFL_DOUBLE("trainer.learning_rate", trainer.learning_rate),
      RDFL_SIZE("trainer.adjust_round", trainer.adjust_round),
      RDFL_BOOL("trainer.dynamic_adjustment", trainer.dynamic_adjustment),
      {"trainer.aggregation",
       [](ExperimentConfig& c, std::string_view v) {
         v = Trim(v);
         if (v == "mean") {
           c.trainer.aggregation = Aggregation::kUnweightedMean;
         } else if (v == "weighted") {
           c.trainer.aggregation = Aggregation::kQuantityWeighted;
         } else {
           BadValue("trainer.aggregation", v, "mean or weighted");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.trainer.aggregation ==
                                    Aggregation::kUnweightedMean
                                ? "mean"
                                : "weighted");
       }},
      RDFL_DOUBLE("trainer.initial_loss", trainer.analytic_initial_loss),
      RDFL_DOUBLE("trainer.decay_rate", trainer.analytic_rate),
      RDFL_SIZE("trainer.dims", trainer.dims),
      RDFL_SIZE("trainer.classes", trainer.classes),
      RDFL_DOUBLE("trainer.samples_per_unit", trainer.samples_per_unit),
      RDFL_SIZE("trainer.validation_samples", trainer.validation_samples),
      {"strategy.mode",
       [](ExperimentConfig& c, std::string_view v) {
         v = Trim(v);
         if (v == "qd-rdfl" || v == "optimal") {
           c.strategy = StrategyMode::kOptimal;
         } else if (v == "fixed-eta") {
           c.strategy = StrategyMode::kFixedEta;
         } else if (v == "random-eta") {
           c.strategy = StrategyMode::kRandomEta;
         } else {
           BadValue("strategy.mode", v, "qd-rdfl, fixed-eta or random-eta");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(StrategyModeName(c.strategy));
       }},
      RDFL_DOUBLE("strategy.fixed_eta", fixed_eta),
      RDFL_DOUBLE("strategy.random_low", random_eta_low),
      RDFL_DOUBLE("strategy.random_high", random_eta_high),
      RDFL_DOUBLE("sweep.min", sweep_min),
      RDFL_DOUBLE("sweep.max", sweep_max),
      RDFL_SIZE("sweep.steps", sweep_steps),
      RDFL_SIZE("sweep.owner", sweep_owner),
      {"sweep.counts",
       [](ExperimentConfig& c, std::string_view v) {
         c.sweep_counts = ToSizes("sweep.counts", v);
       },
       [](const ExperimentConfig& c) { return Join(c.sweep_counts); }},
      RDFL_SIZE("sweep.runs", runs),
      {"deviation.owners",
       [](ExperimentConfig& c, std::string_view v) {
         c.deviation_owners = ToSizes("deviation.owners", v);
       },
       [](const ExperimentConfig& c) { return Join(c.deviation_owners); }},
      {"deviation.fractions",
       [](ExperimentConfig& c, std::string_view v) {
         c.deviation_fractions = ToDoubles("deviation.fractions", v);
       },
       [](const ExperimentConfig& c) { return Join(c.deviation_fractions); }},
      RDFL_DOUBLE("deviation.min", deviation_min),
      RDFL_DOUBLE("deviation.max", deviation_max),
      RDFL_SIZE("deviation.steps", deviation_steps),
      RDFL_DOUBLE("deviation.ratio", deviation_ratio),
      RDFL_DOUBLE("deviation.fraction", deviation_fraction),
      {"match.sigma",
       [](ExperimentConfig& c, std::string_view v) {
         c.match_sigma = ToDoubles("match.sigma", v);
       },
       [](const ExperimentConfig& c) { return Join(c.match_sigma); }},
      {"match.d",
       [](ExperimentConfig& c, std::string_view v) {
         c.match_d = ToDoubles("match.d", v);
       },
       [](const ExperimentConfig& c) { return Join(c.match_d); }},
      {"match.x",
       [](ExperimentConfig& c, std::string_view v) {
         c.match_x = ToDoubles("match.x", v);
       },
       [](const ExperimentConfig& c) { return Join(c.match_x); }},
      RDFL_BOOL("output.datasets", export_datasets),
  };
  return fields;
}

#undef RDFL_DOUBLE
#undef RDFL_SIZE
#undef RDFL_BOOL

void Check(bool ok, const std::string& message) {
  if (!ok) Fail(ErrorCode::kConfig, message);
}

void CheckSpec(const ValueSpec& spec, std::size_t count, const char* key,
               bool allow_zero) {
  switch (spec.kind) {
    case ValueSpec::Kind::kList:
      Check(spec.values.size() == count,
            std::string(key) + " lists " + std::to_string(spec.values.size()) +
                " values for " + std::to_string(count) + " parties");
      for (double v : spec.values) {
        Check(std::isfinite(v) && (v > 0.0 || (allow_zero && v == 0.0)),
              std::string(key) + " values must be positive");
      }
      break;
    case ValueSpec::Kind::kUniform:
      Check(std::isfinite(spec.low) && std::isfinite(spec.high) &&
                spec.low >= 0.0 && spec.high > spec.low,
            std::string(key) + " needs 0 <= low < high");
      break;
    case ValueSpec::Kind::kGrid:
      Check(spec.step > 0.0 && spec.high >= spec.step,
            std::string(key) + " needs 0 < step <= high");
      break;
  }
}

}  // namespace

const char* StrategyModeName(StrategyMode mode) {
  switch (mode) {
    case StrategyMode::kOptimal:
      return "qd-rdfl";
    case StrategyMode::kFixedEta:
      return "fixed-eta";
    case StrategyMode::kRandomEta:
      return "random-eta";
  }
  return "unknown";
}

void ExperimentConfig::Validate() const {
  Check(has_seed, "seed is required");
  Check(owners >= 2, "owners.count must be >= 2 (N >= 2)");
  Check(CenterCount() >= owners, "centers.count must be >= owners.count");
  Check(threads >= 1, "threads must be >= 1");
  try {
    market.Validate();
    trainer.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kConfig, e.what());
  }
  CheckSpec(quality, owners, "owners.quality", false);
  CheckSpec(sigma, CenterCount(), "centers.sigma", false);
  Check(owner_capacity > 0.0, "owners.capacity must be > 0");
  Check(center_capacity >= 0.0, "centers.capacity must be >= 0");
  Check(fixed_eta >= 0.0, "strategy.fixed_eta must be >= 0");
  Check(random_eta_low >= 0.0 && RandomEtaHigh() > random_eta_low,
        "strategy.random_low/high need 0 <= low < high");
  Check(sweep_steps >= 3, "sweep.steps must be >= 3");
  Check(sweep_min >= 0.0, "sweep.min must be >= 0");
  Check(sweep_max < 0.0 || sweep_max > sweep_min,
        "sweep.max must exceed sweep.min");
  Check(sweep_owner >= 1 && sweep_owner <= owners,
        "sweep.owner must name an owner (1..N)");
  Check(!sweep_counts.empty(), "sweep.counts must not be empty");
  for (std::size_t n : sweep_counts) {
    Check(n >= 2, "sweep.counts values must be >= 2");
  }
  Check(runs >= 1, "sweep.runs must be >= 1");
  for (std::size_t n : deviation_owners) {
    Check(n >= 1 && n <= owners, "deviation.owners must name owners (1..N)");
  }
  for (double f : deviation_fractions) {
    Check(f > 0.0 && f <= 1.0, "deviation.fractions must lie in (0, 1]");
  }
  Check(deviation_min > -1.0 && deviation_max > deviation_min,
        "deviation range needs -1 < min < max");
  Check(deviation_steps >= 2, "deviation.steps must be >= 2");
  Check(deviation_ratio > -1.0, "deviation.ratio must be > -1");
  Check(deviation_fraction >= 0.0 && deviation_fraction <= 1.0,
        "deviation.fraction must lie in [0, 1]");
  Check(match_d.size() == match_sigma.size(),
        "match.d and match.sigma must have one entry per center");
  if (!match_x.empty()) {
    Check(!match_sigma.empty(), "match.x needs match.sigma and match.d");
    Check(match_sigma.size() >= match_x.size(),
          "match input needs at least as many centers as owners");
  }
}

std::string ExperimentConfig::Canonical() const {
  std::string out;
  for (const auto& f : Fields()) {
    out += f.key;
    out += " = ";
    out += f.get(*this);
    out += '\n';
  }
  return out;
}

std::string ExperimentConfig::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : Canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void SetConfigValue(ExperimentConfig& config, std::string_view key,
                    std::string_view value) {
  key = Trim(key);
  for (const auto& f : Fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  Fail(ErrorCode::kConfig, "unknown key '" + std::string(key) + "'");
}

ExperimentConfig ParseConfig(std::string_view text, std::string_view source,
                             const ExperimentConfig& base) {
  ExperimentConfig config = base;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where =
        std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorCode::kConfig, where + "expected 'key = value'");
    }
    try {
      SetConfigValue(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, where + e.what());
    }
  }
  return config;
}

ExperimentConfig LoadConfig(const std::string& path,
                            const ExperimentConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kConfig, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str(), path, base);
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& f : Fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace rdfl

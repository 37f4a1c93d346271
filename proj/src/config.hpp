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

// Experiment configuration: flat `section.key = value` lines, `#` comments.
//
//   scenario = baseline
//   seed = 7
//   owners.count = 10
//   owners.quality = uniform        # or a list: 0.5, 0.8, 1.0
//   centers.sigma = grid            # uniform | grid | list
//   market.alpha = 5
//
// Every recognised key is listed by ConfigKeys(); unknown keys are errors.

#ifndef RDFL_CONFIG_HPP_
#define RDFL_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "market.hpp"
#include "training.hpp"

namespace rdfl {

// A list of values, or a distribution to draw them from.
struct ValueSpec {
  enum class Kind { kList, kUniform, kGrid };
  Kind kind = Kind::kUniform;
  std::vector<double> values;  // kList
  double low = 0.0;            // kUniform: [low, high]
  double high = 1.0;
  double step = 0.1;           // kGrid: step, 2 step, ..., high

  bool operator==(const ValueSpec&) const = default;
};

enum class StrategyMode { kOptimal, kFixedEta, kRandomEta };

const char* StrategyModeName(StrategyMode mode);

struct ExperimentConfig {
  std::string scenario = "default";
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::size_t threads = 1;

  std::size_t owners = 10;   // N
  std::size_t centers = 0;   // M; 0 means M = N
  MarketParams market;
  ValueSpec quality;         // true data quality f_n
  ValueSpec sigma{ValueSpec::Kind::kGrid, {}, 0.0, 1.0, 0.1};
  double owner_capacity = std::numeric_limits<double>::infinity();
  double center_capacity = std::numeric_limits<double>::infinity();
  std::size_t pool_samples = 0;  // per owner; 0 derives it from x_n*

  TrainerConfig trainer;

  StrategyMode strategy = StrategyMode::kOptimal;
  double fixed_eta = 2.5;
  double random_eta_low = 0.0;
  double random_eta_high = -1.0;  // < 0 means 2 alpha

  // Sweeps. sweep_max < 0 means twice the equilibrium value.
  double sweep_min = 0.0;
  double sweep_max = -1.0;
  std::size_t sweep_steps = 101;
  std::size_t sweep_owner = 1;  // one-based
  std::vector<std::size_t> sweep_counts{4, 8, 12, 16, 20};
  std::size_t runs = 100;

  // Misreports of f_n: reported = measured * (1 + ratio).
  std::vector<std::size_t> deviation_owners;  // one-based
  std::vector<double> deviation_fractions;
  double deviation_min = -0.6;
  double deviation_max = 0.6;
  std::size_t deviation_steps = 13;
  double deviation_ratio = 0.0;
  double deviation_fraction = 0.0;

  // Direct matching input: one entry per center (sigma, d) and owner (x).
  std::vector<double> match_sigma;
  std::vector<double> match_d;
  std::vector<double> match_x;

  bool export_datasets = false;

  std::size_t CenterCount() const { return centers == 0 ? owners : centers; }
  double RandomEtaHigh() const {
    return random_eta_high < 0.0 ? 2.0 * market.alpha : random_eta_high;
  }

  // Throws Error(kConfig) naming the first violated invariant.
  void Validate() const;

  // Canonical `key = value` dump; stable across runs, used for hashing.
  std::string Canonical() const;
  // FNV-1a of Canonical(), as 16 hex digits.
  std::string Hash() const;
};

// Applies one `key = value` assignment. Throws Error(kConfig).
void SetConfigValue(ExperimentConfig& config, std::string_view key,
                    std::string_view value);

// Parses a whole document on top of `base`; errors carry `source:line`.
ExperimentConfig ParseConfig(std::string_view text,
                             std::string_view source = "<config>",
                             const ExperimentConfig& base = {});

ExperimentConfig LoadConfig(const std::string& path,
                            const ExperimentConfig& base = {});

std::vector<std::string> ConfigKeys();

}  // namespace rdfl

#endif  // RDFL_CONFIG_HPP_

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

// Experiment drivers behind the CLI commands. Each driver is a pure function
// of its ExperimentConfig (seed included).

#ifndef RDFL_EXPERIMENTS_HPP_
#define RDFL_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "equilibrium.hpp"
#include "federated.hpp"
#include "market.hpp"
#include "matching.hpp"
#include "table.hpp"
#include "training.hpp"

namespace rdfl {

struct MarketDraw {
  std::vector<DataOwner> owners;  // reported_quality = true quality
  std::vector<ComputeCenter> centers;
};

// Owners and centers for `owner_count` owners (M from the config, at least
// N). Drawn values use stream index `draw`, so redrawing after a non-viable
// market is deterministic.
MarketDraw DrawMarket(const ExperimentConfig& config, std::size_t owner_count,
                      std::uint64_t seed, std::uint64_t draw = 0);

// Solves the market under `mode`: the equilibrium payment, a fixed payment,
// or one drawn uniformly from the configured range with `rng_index`.
SneSolution SolveStrategy(const MarketDraw& market,
                          const ExperimentConfig& config, StrategyMode mode,
                          std::uint64_t seed, std::uint64_t rng_index = 0);

// U_s(eta) and mean U_n(eta) with the owners' best responses at every eta.
SweepResult SweepEta(const ExperimentConfig& config);

// U_n(x_n) of owner config.sweep_owner with eta* and the others' q fixed.
SweepResult SweepOwner(const ExperimentConfig& config);

// Reported-quality deviations. Series "D<n>" scales owner n alone; series
// "frac=<p>" scales the first ceil(p N) owners together. focus is the
// deviating owner's U_n (first deviator for group series); infeasible
// markets give NaN rows.
SweepResult Deviate(const ExperimentConfig& config);

struct CompareRun {
  std::size_t owners = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t redraws = 0;  // non-viable markets skipped before this one
  double eta[3] = {0, 0, 0};           // qd-rdfl, fixed-eta, random-eta
  double u_server[3] = {0, 0, 0};
  double mean_u_owner[3] = {0, 0, 0};
};

// Shared-seed comparison of the three strategies for every N in
// config.sweep_counts and config.runs runs each. Rows are ordered by
// (N, run) regardless of the thread count.
std::vector<CompareRun> Compare(const ExperimentConfig& config);

struct SimulationSetup {
  MarketDraw market;               // reported qualities after misreports
  std::vector<double> true_quality;
  std::vector<double> measured;    // 1 - MSE of each owner's pool
  std::vector<std::size_t> misreporters;
  std::vector<OwnerDataset> pools;
  OwnerDataset validation;
  SneSolution solution;
  Matching matching;
};

// Draws a market, generates sample pools whose noise matches each owner's
// true quality, applies the configured misreports, solves and matches.
// `draw` selects the market draw; non-viable draws throw kNoViableMarket.
SimulationSetup PrepareSimulation(const ExperimentConfig& config,
                                  std::uint64_t seed, std::uint64_t draw = 0);

struct SimulationResult {
  SimulationSetup setup;
  RunHistory history;
};

SimulationResult Simulate(const ExperimentConfig& config);

struct AblationPair {
  std::uint64_t seed = 0;
  std::size_t redraws = 0;
  std::vector<double> adjusted_loss;  // per round
  std::vector<double> static_loss;
  std::size_t adjustments = 0;

  double AdjustedFinal() const { return adjusted_loss.back(); }
  double StaticFinal() const { return static_loss.back(); }
};

// config.runs A/B pairs that differ only in trainer.dynamic_adjustment.
std::vector<AblationPair> Ablate(const ExperimentConfig& config);

// One-sided sign-test p-value of observing at least `wins` of `trials`.
double SignTestPValue(std::size_t wins, std::size_t trials);

struct CommandOutput {
  std::string summary;              // human-readable
  std::vector<Table> tables;        // written as <name>.csv
  std::vector<SweepResult> sweeps;  // drawn as <name>*.svg
};

const std::vector<std::string>& CommandNames();

// Validates the config, then runs one CLI command. Throws Error.
CommandOutput RunCommand(std::string_view command,
                         const ExperimentConfig& config);

}  // namespace rdfl

#endif  // RDFL_EXPERIMENTS_HPP_

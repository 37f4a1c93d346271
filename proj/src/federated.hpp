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

#ifndef RDFL_FEDERATED_HPP_
#define RDFL_FEDERATED_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "equilibrium.hpp"
#include "market.hpp"
#include "training.hpp"

namespace rdfl {

struct RunEvent {
  std::size_t round = 0;  // 0 = before training
  std::string message;

  bool operator==(const RunEvent&) const = default;
};

struct RunHistory {
  std::vector<RoundRecord> rounds;
  std::vector<RunEvent> events;
  PaymentLedger ledger;
  SneSolution initial_solution;
  SneSolution final_solution;
  Matching matching;
  ModelState final_model;
  std::vector<std::size_t> samples;  // per owner, after the run
  std::size_t adjustments = 0;

  double FinalGlobalLoss() const {
    return rounds.empty() ? 0.0 : rounds.back().global_loss;
  }
};

// Runs the training loop for `solution` and `matching`. `pools` holds one
// sample pool per owner (indexed like solution.owners); each retained owner
// transfers floor(x_n* * samples_per_unit) seeded-random samples from its
// pool to its matched center. At round adjust_round the strategies are
// re-solved from the realized qualities when dynamic adjustment is enabled.
// `validation` scores the global model under the gradient trainer and may be
// null for the analytic trainer.
RunHistory RunFederated(const SneSolution& solution, const Matching& matching,
                        std::span<const OwnerDataset> pools,
                        const OwnerDataset* validation,
                        const TrainerConfig& config, std::uint64_t seed);

}  // namespace rdfl

#endif  // RDFL_FEDERATED_HPP_

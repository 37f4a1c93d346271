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

// Closed-form Stackelberg-Nash equilibrium of the three-party market, solved by
// backward induction, and a grid-deviation verifier for it.
//
// With S = sum_i 1/f_i over the participating owners and
//   T_n = (N-1) / (lambda rho S) * (1 - (N-1) / (f_n S)),
// the owners' Nash response to a payment eta is q_n = eta * T_n, the model
// owner's optimal payment is eta = alpha - 1 / sum_n T_n, and the centers'
// equilibrium undertaking is
//   d_m = lambda (M-1) P / (epsilon sum_i sigma_i) * (1 - sigma_m (M-1) /
//         sum_i sigma_i)
// with P = sum_n rho x_n.

#ifndef RDFL_EQUILIBRIUM_HPP_
#define RDFL_EQUILIBRIUM_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "market.hpp"

namespace rdfl {

struct SolverIntermediates {
  double inv_quality_sum = 0.0;          // S over the participants
  std::vector<double> response_coeffs;   // T_n, one per owner; 0 if dropped
  double sum_response = 0.0;             // sum of T_n over the participants
  std::vector<std::size_t> participants;  // ascending owner indices
};

enum class DropReason {
  kBelowQualityThreshold,  // f_n < xi
  kNonPositiveResponse,    // q_n* <= 0 in the game it was dropped from
};

const char* DropReasonName(DropReason reason);

struct DroppedOwner {
  std::size_t owner = 0;
  DropReason reason = DropReason::kNonPositiveResponse;
};

struct SneSolution {
  StrategyProfile profile;
  SolverIntermediates intermediates;
  std::vector<DroppedOwner> dropped_owners;
  std::vector<std::size_t> clipped_owners;   // x_n* hit |X_n|
  std::vector<std::size_t> idle_centers;     // d_m* == 0
  std::vector<std::size_t> clipped_centers;  // d_m* hit |d_m|

  // Inputs the profile was solved for.
  std::vector<DataOwner> owners;
  std::vector<ComputeCenter> centers;
  MarketParams params;
};

// Fraction of capacity an owner's quantity is clipped to, keeping
// x_n strictly below |X_n|.
inline constexpr double kCapacityClipFactor = 1.0 - 1e-9;

// S and T_n for exactly the given quality list (no pruning).
SolverIntermediates ResponseCoefficients(std::span<const double> qualities,
                                         const MarketParams& params);

// max(0, alpha - 1 / sum T_n) over all of `owners`.
double OptimalPayment(std::span<const DataOwner> owners,
                      const MarketParams& params);

// eta * T_n over all of `owners`; negative for owners that would not
// participate.
double BestResponseQuality(std::size_t n, std::span<const DataOwner> owners,
                           double eta, const MarketParams& params);

// (N-1) eta / (lambda rho S): the total contribution at the owners' Nash
// equilibrium.
double NashTotalQuality(double eta, std::span<const DataOwner> owners,
                        const MarketParams& params);

// max(0, d_m*) over all of `centers` given total_payment = sum rho x_n.
double OptimalUndertaking(std::size_t m, std::span<const ComputeCenter> centers,
                          double total_payment, const MarketParams& params);

// Equilibrium undertakings of the center game: centers whose closed-form
// share is not positive are idled one at a time (highest sigma first) and the
// reduced game is re-solved. Capacity clipping is reported via `clipped`.
std::vector<double> EquilibriumUndertakings(
    std::span<const ComputeCenter> centers, double total_payment,
    const MarketParams& params, std::vector<std::size_t>* clipped = nullptr);

// Backward-induction solve in the order eta*, then q*/x*, then d*. Owners
// below xi or with a non-positive best response are dropped (lowest quality
// first) and the reduced game is re-solved until every retained owner has a
// strictly positive response.
SneSolution SolveSne(std::span<const DataOwner> owners,
                     std::span<const ComputeCenter> centers,
                     const MarketParams& params);

// The followers' side of the game for a payment `eta` chosen by the model
// owner: same participation pruning as SolveSne, then q_n = eta * T_n and the
// centers' equilibrium for the resulting quantities. eta = 0 yields an empty
// market with every quantity at zero.
SneSolution SolveFollowers(std::span<const DataOwner> owners,
                           std::span<const ComputeCenter> centers,
                           const MarketParams& params, double eta);

struct VerificationReport {
  double server_gain = 0.0;               // best eta deviation gain
  std::vector<double> owner_gains;        // one per owner
  std::vector<double> center_gains;       // one per center
  double max_owner_gain = 0.0;
  double max_center_gain = 0.0;
  std::size_t grid_steps = 0;
  double tolerance = 0.0;

  double MaxGain() const;
  bool Passed() const { return MaxGain() < tolerance; }
};

inline constexpr std::size_t kDefaultGridSteps = 10000;

// Checks every unilateral-deviation inequality of the equilibrium by grid
// search. Gains are utility improvements of the best grid point over the
// solved strategy; they are reported, never thrown.
VerificationReport VerifySne(const SneSolution& solution,
                             std::size_t grid_steps = kDefaultGridSteps,
                             double tolerance = 1e-5);

}  // namespace rdfl

#endif  // RDFL_EQUILIBRIUM_HPP_

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

// Domain types of the three-party data market and the utility of each party.
//
// Indices used throughout the library are zero-based positions into the
// owner/center vectors. The `id` fields carry the one-based labels that are
// shown to users (D_1 .. D_N, C_1 .. C_M).

#ifndef RDFL_MARKET_HPP_
#define RDFL_MARKET_HPP_

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace rdfl {

// Global economic constants. The model-quality function is fixed to
// g(x) = ln(1 + x); see ModelQuality().
struct MarketParams {
  double lambda = 1.0;   // market regulating factor
  double rho = 1.0;      // payment per unit of training data
  double epsilon = 1.0;  // training cost per unit of data per unit power
  double alpha = 5.0;    // model-quality adjustment factor
  double xi = 0.05;      // minimum admissible data quality

  // Throws Error(kInvalidArgument) on the first violated invariant.
  void Validate() const;
};

struct DataOwner {
  int id = 0;
  double reported_quality = 1.0;  // f_n
  double capacity = std::numeric_limits<double>::infinity();  // |X_n|
  double chosen_quantity = 0.0;   // x_n
};

struct ComputeCenter {
  int id = 0;
  double sigma = 1.0;       // computational power (cost) factor
  double capacity = std::numeric_limits<double>::infinity();  // |d_m|
  double undertaken = 0.0;  // d_m
};

// q_n = f_n * x_n together with the quantity that produced it.
struct OwnerContribution {
  double quality = 0.0;   // q_n
  double quantity = 0.0;  // x_n
};

// One-to-one owner/center assignment. Row k of `owner_center` belongs to the
// owner whose index in the full owner list is `owner_rows[k]`.
struct Matching {
  std::vector<std::optional<std::size_t>> owner_center;
  std::vector<std::size_t> owner_rows;
  std::vector<std::size_t> unmatched_centers;
  std::size_t matched_count = 0;

  // Center matched to the owner with full-list index `owner`, if any.
  std::optional<std::size_t> CenterOf(std::size_t owner) const;
  // Full-list owner index matched to `center`, if any.
  std::optional<std::size_t> OwnerOf(std::size_t center) const;

  bool operator==(const Matching&) const = default;
};

struct UtilityReport {
  double server = 0.0;
  std::vector<double> owners;
  std::vector<double> centers;
  double global = 0.0;

  // Sum of all three groups recomputed from the parts.
  double RecomputeGlobal() const;
};

struct StrategyProfile {
  double eta = 0.0;
  std::vector<OwnerContribution> contributions;  // one per owner
  std::vector<double> undertakings;              // d_m, one per center
  std::optional<Matching> matching;
  std::optional<UtilityReport> utilities;

  double TotalQuality() const;
};

// A transfer of currency between two parties.
struct Payment {
  std::size_t round = 0;
  std::size_t payer = 0;  // owner index
  std::size_t payee = 0;  // center index
  double amount = 0.0;

  bool operator==(const Payment&) const = default;
};

// g(x) = ln(1 + x).
double ModelQuality(double total_quality);

// rho * sum of x_n over `owners`, using their chosen quantities.
double TotalTrainingPayment(std::span<const DataOwner> owners,
                            const MarketParams& params);

// U_m = lambda * d_m / sum(d) * total_payment - epsilon * sigma_m * d_m, where
// total_payment is sum(rho * x_n).
double UtilityCenter(std::size_t m, std::span<const double> undertakings,
                     std::span<const ComputeCenter> centers,
                     double total_payment, const MarketParams& params);

// Convenience overload reading x_n from the owners' chosen quantities.
double UtilityCenter(std::size_t m, std::span<const double> undertakings,
                     std::span<const ComputeCenter> centers,
                     std::span<const DataOwner> owners,
                     const MarketParams& params);

// U_n = q_n / sum(q) * eta - lambda * rho * x_n with x_n = q_n / f_n.
double UtilityOwner(std::size_t n, std::span<const double> contributions,
                    std::span<const DataOwner> owners, double eta,
                    const MarketParams& params);

// U_s = alpha * g(total_quality) - eta.
double UtilityServer(double eta, double total_quality,
                     const MarketParams& params);

// Evaluates every party at `profile`. Owner quantities come from
// profile.contributions, center quantities from profile.undertakings.
UtilityReport EvaluateUtilities(const StrategyProfile& profile,
                                std::span<const DataOwner> owners,
                                std::span<const ComputeCenter> centers,
                                const MarketParams& params);

}  // namespace rdfl

#endif  // RDFL_MARKET_HPP_

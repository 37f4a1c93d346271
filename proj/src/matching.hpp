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

// One-time stable matching of data owners to computing centers.
//
// Owners propose (deferred acceptance). Every owner proposes to centers in
// descending sigma order; each center ranks owners by |d_m* - x_n*|
// ascending. Ties are broken by the lower index on both sides.

#ifndef RDFL_MATCHING_HPP_
#define RDFL_MATCHING_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "equilibrium.hpp"
#include "market.hpp"

namespace rdfl {

struct PreferenceTables {
  // owner_proposal_order[n] lists center indices, most preferred first.
  std::vector<std::vector<std::size_t>> owner_proposal_order;
  // center_preference[m] lists owner rows, most preferred first.
  std::vector<std::vector<std::size_t>> center_preference;

  std::size_t owner_count() const { return owner_proposal_order.size(); }
  std::size_t center_count() const { return center_preference.size(); }
};

PreferenceTables BuildPreferences(std::span<const double> owner_quantities,
                                  std::span<const ComputeCenter> centers,
                                  std::span<const double> center_undertakings);

// Owner-proposing deferred acceptance. The returned matching has identity
// owner_rows (row k is owner k of the tables).
Matching GaleShapley(const PreferenceTables& prefs);

struct BlockingPair {
  std::size_t owner = 0;  // row
  std::size_t center = 0;

  bool operator==(const BlockingPair&) const = default;
};

// Every (owner, center) pair that strictly prefer each other to their current
// assignment. Empty iff `matching` is stable.
std::vector<BlockingPair> FindBlockingPairs(const Matching& matching,
                                            const PreferenceTables& prefs);

inline bool IsStable(const Matching& matching, const PreferenceTables& prefs) {
  return FindBlockingPairs(matching, prefs).empty();
}

// Matches the owners retained by `solution` to its centers, using x_n* and
// d_m* as preferences. Rows of the result map back to full owner indices.
Matching MatchSolution(const SneSolution& solution);

// Center quantities after matching: a matched center undertakes exactly the
// x_n of its owner, unmatched centers idle.
std::vector<double> RealizedUndertakings(const Matching& matching,
                                         const StrategyProfile& profile,
                                         std::size_t center_count);

}  // namespace rdfl

#endif  // RDFL_MATCHING_HPP_

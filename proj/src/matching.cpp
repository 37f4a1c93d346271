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

#include "matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "error.hpp"

namespace rdfl {

PreferenceTables BuildPreferences(std::span<const double> owner_quantities,
                                  std::span<const ComputeCenter> centers,
                                  std::span<const double> center_undertakings) {
  Require(!owner_quantities.empty() && !centers.empty(),
          ErrorCode::kInvalidArgument,
          "matching needs at least one owner and one center");
  Require(center_undertakings.size() == centers.size(),
          ErrorCode::kInvalidArgument,
          "one undertaking per center is required");
  for (double x : owner_quantities) {
    Require(x > 0.0, ErrorCode::kInvalidArgument,
            "owner quantities must be positive");
  }
  for (double d : center_undertakings) {
    Require(d >= 0.0, ErrorCode::kInvalidArgument,
            "center undertakings must be >= 0");
  }

  std::vector<std::size_t> by_sigma(centers.size());
  std::iota(by_sigma.begin(), by_sigma.end(), 0);
  std::stable_sort(by_sigma.begin(), by_sigma.end(),
                   [&](std::size_t a, std::size_t b) {
                     return centers[a].sigma > centers[b].sigma;
                   });

  PreferenceTables prefs;
  prefs.owner_proposal_order.assign(owner_quantities.size(), by_sigma);
  prefs.center_preference.resize(centers.size());
  for (std::size_t m = 0; m < centers.size(); ++m) {
    auto& ranking = prefs.center_preference[m];
    ranking.resize(owner_quantities.size());
    std::iota(ranking.begin(), ranking.end(), 0);
    const double d = center_undertakings[m];
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](std::size_t a, std::size_t b) {
                       return std::abs(d - owner_quantities[a]) <
                              std::abs(d - owner_quantities[b]);
                     });
  }
  return prefs;
}

namespace {

// rank[m][n] = position of owner n in center m's list.
std::vector<std::vector<std::size_t>> CenterRanks(const PreferenceTables& p) {
  std::vector<std::vector<std::size_t>> rank(p.center_count());
  for (std::size_t m = 0; m < p.center_count(); ++m) {
    rank[m].assign(p.owner_count(), p.owner_count());
    for (std::size_t pos = 0; pos < p.center_preference[m].size(); ++pos) {
      rank[m][p.center_preference[m][pos]] = pos;
    }
  }
  return rank;
}

}  // namespace

Matching GaleShapley(const PreferenceTables& prefs) {
  const std::size_t owners = prefs.owner_count();
  const std::size_t centers = prefs.center_count();
  const auto rank = CenterRanks(prefs);

  std::vector<std::optional<std::size_t>> assigned(owners);
  std::vector<std::optional<std::size_t>> held(centers);
  std::vector<std::size_t> next_proposal(owners, 0);

  // Sweep the free owners in index order until nobody can propose.
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t n = 0; n < owners; ++n) {
      if (assigned[n]) continue;
      const auto& order = prefs.owner_proposal_order[n];
      if (next_proposal[n] >= order.size()) continue;
      const std::size_t c = order[next_proposal[n]++];
      progress = true;
      if (held[c]) {
        const std::size_t j = *held[c];
        if (rank[c][n] < rank[c][j]) {
          assigned[n] = c;
          assigned[j].reset();
          held[c] = n;
        }
      } else {
        assigned[n] = c;
        held[c] = n;
      }
    }
  }

  Matching out;
  out.owner_center = std::move(assigned);
  out.owner_rows.resize(owners);
  std::iota(out.owner_rows.begin(), out.owner_rows.end(), 0);
  for (std::size_t m = 0; m < centers; ++m) {
    if (held[m]) {
      ++out.matched_count;
    } else {
      out.unmatched_centers.push_back(m);
    }
  }
  return out;
}

std::vector<BlockingPair> FindBlockingPairs(const Matching& matching,
                                            const PreferenceTables& prefs) {
  const std::size_t owners = prefs.owner_count();
  const std::size_t centers = prefs.center_count();
  Require(matching.owner_center.size() == owners, ErrorCode::kInvalidArgument,
          "matching and preference tables disagree on the owner count");
  const auto rank = CenterRanks(prefs);

  std::vector<std::optional<std::size_t>> holder(centers);
  for (std::size_t n = 0; n < owners; ++n) {
    if (matching.owner_center[n]) holder[*matching.owner_center[n]] = n;
  }

  std::vector<BlockingPair> blocking;
  for (std::size_t n = 0; n < owners; ++n) {
    const auto& order = prefs.owner_proposal_order[n];
    // Position of the current partner in the owner's list; unmatched owners
    // prefer every center to nothing.
    std::size_t current = order.size();
    if (matching.owner_center[n]) {
      const auto it =
          std::find(order.begin(), order.end(), *matching.owner_center[n]);
      current = static_cast<std::size_t>(it - order.begin());
    }
    for (std::size_t pos = 0; pos < current; ++pos) {
      const std::size_t c = order[pos];
      if (!holder[c] || rank[c][n] < rank[c][*holder[c]]) {
        blocking.push_back({n, c});
      }
    }
  }
  return blocking;
}

Matching MatchSolution(const SneSolution& solution) {
  const auto& participants = solution.intermediates.participants;
  std::vector<double> x;
  x.reserve(participants.size());
  for (std::size_t n : participants) {
    x.push_back(solution.profile.contributions[n].quantity);
  }
  const auto prefs =
      BuildPreferences(x, solution.centers, solution.profile.undertakings);
  Matching matching = GaleShapley(prefs);
  matching.owner_rows = participants;
  return matching;
}

std::vector<double> RealizedUndertakings(const Matching& matching,
                                         const StrategyProfile& profile,
                                         std::size_t center_count) {
  std::vector<double> d(center_count, 0.0);
  for (std::size_t row = 0; row < matching.owner_center.size(); ++row) {
    if (const auto& c = matching.owner_center[row]) {
      d[*c] = profile.contributions[matching.owner_rows[row]].quantity;
    }
  }
  return d;
}

}  // namespace rdfl

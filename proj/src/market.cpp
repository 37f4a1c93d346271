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

#include "market.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace rdfl {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kDegenerateMarket:
      return "degenerate-market";
    case ErrorCode::kInvalidQuality:
      return "invalid-quality";
    case ErrorCode::kInsufficientParticipants:
      return "insufficient-participants";
    case ErrorCode::kNoViableMarket:
      return "no-viable-market";
    case ErrorCode::kTrainingDivergence:
      return "training-divergence";
    case ErrorCode::kConfig:
      return "config";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

void MarketParams::Validate() const {
  Require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::kInvalidArgument,
          "market.lambda must be > 0");
  Require(std::isfinite(rho) && rho >= 0.0, ErrorCode::kInvalidArgument,
          "market.rho must be >= 0");
  Require(std::isfinite(epsilon) && epsilon > 0.0,
          ErrorCode::kInvalidArgument, "market.epsilon must be > 0");
  Require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::kInvalidArgument,
          "market.alpha must be > 0");
  Require(std::isfinite(xi) && xi >= 0.0 && xi < 1.0,
          ErrorCode::kInvalidArgument, "market.xi must lie in [0, 1)");
}

std::optional<std::size_t> Matching::CenterOf(std::size_t owner) const {
  for (std::size_t row = 0; row < owner_rows.size(); ++row) {
    if (owner_rows[row] == owner) return owner_center[row];
  }
  return std::nullopt;
}

std::optional<std::size_t> Matching::OwnerOf(std::size_t center) const {
  for (std::size_t row = 0; row < owner_center.size(); ++row) {
    if (owner_center[row] == center) return owner_rows[row];
  }
  return std::nullopt;
}

double UtilityReport::RecomputeGlobal() const {
  return server + std::accumulate(owners.begin(), owners.end(), 0.0) +
         std::accumulate(centers.begin(), centers.end(), 0.0);
}

double StrategyProfile::TotalQuality() const {
  double total = 0.0;
  for (const auto& c : contributions) total += c.quality;
  return total;
}

double ModelQuality(double total_quality) { return std::log1p(total_quality); }

double TotalTrainingPayment(std::span<const DataOwner> owners,
                            const MarketParams& params) {
  double total = 0.0;
  for (const auto& owner : owners) total += owner.chosen_quantity;
  return params.rho * total;
}

double UtilityCenter(std::size_t m, std::span<const double> undertakings,
                     std::span<const ComputeCenter> centers,
                     double total_payment, const MarketParams& params) {
  Require(m < undertakings.size() && undertakings.size() == centers.size(),
          ErrorCode::kInvalidArgument, "center index out of range");
  double total = 0.0;
  for (double d : undertakings) {
    Require(d >= 0.0, ErrorCode::kInvalidArgument,
            "undertaken quantities must be >= 0");
    total += d;
  }
  if (total <= 0.0) {
    Fail(ErrorCode::kDegenerateMarket,
         "total undertaken quantity is zero; revenue share is undefined");
  }
  const double d = undertakings[m];
  if (d == 0.0) return 0.0;
  return params.lambda * (d / total) * total_payment -
         params.epsilon * centers[m].sigma * d;
}

double UtilityCenter(std::size_t m, std::span<const double> undertakings,
                     std::span<const ComputeCenter> centers,
                     std::span<const DataOwner> owners,
                     const MarketParams& params) {
  return UtilityCenter(m, undertakings, centers,
                       TotalTrainingPayment(owners, params), params);
}

double UtilityOwner(std::size_t n, std::span<const double> contributions,
                    std::span<const DataOwner> owners, double eta,
                    const MarketParams& params) {
  Require(n < contributions.size() && contributions.size() == owners.size(),
          ErrorCode::kInvalidArgument, "owner index out of range");
  double total = 0.0;
  for (double q : contributions) total += q;
  if (total <= 0.0) {
    Fail(ErrorCode::kDegenerateMarket,
         "total quality contribution is zero; reward share is undefined");
  }
  const double f = owners[n].reported_quality;
  if (!(f > 0.0)) {
    Fail(ErrorCode::kInvalidQuality,
         "owner " + std::to_string(owners[n].id) + " has non-positive quality");
  }
  const double q = contributions[n];
  if (q == 0.0) return 0.0;
  const double quantity = q / f;
  return (q / total) * eta - params.lambda * params.rho * quantity;
}

double UtilityServer(double eta, double total_quality,
                     const MarketParams& params) {
  Require(total_quality >= 0.0, ErrorCode::kInvalidArgument,
          "total quality contribution must be >= 0");
  Require(eta >= 0.0, ErrorCode::kInvalidArgument, "payment must be >= 0");
  return params.alpha * ModelQuality(total_quality) - eta;
}

UtilityReport EvaluateUtilities(const StrategyProfile& profile,
                                std::span<const DataOwner> owners,
                                std::span<const ComputeCenter> centers,
                                const MarketParams& params) {
  Require(profile.contributions.size() == owners.size() &&
              profile.undertakings.size() == centers.size(),
          ErrorCode::kInvalidArgument, "profile does not fit the market");
  UtilityReport report;
  const double total_quality = profile.TotalQuality();
  report.server = UtilityServer(profile.eta, total_quality, params);

  // An empty side of the market earns and pays nothing.
  std::vector<double> q;
  double total_quantity = 0.0;
  for (const auto& c : profile.contributions) {
    q.push_back(c.quality);
    total_quantity += c.quantity;
  }
  report.owners.assign(owners.size(), 0.0);
  if (total_quality > 0.0) {
    for (std::size_t n = 0; n < owners.size(); ++n) {
      if (q[n] > 0.0) {
        report.owners[n] = UtilityOwner(n, q, owners, profile.eta, params);
      }
    }
  }

  report.centers.assign(centers.size(), 0.0);
  double total_undertaken = 0.0;
  for (double d : profile.undertakings) total_undertaken += d;
  if (total_undertaken > 0.0) {
    const double payment = params.rho * total_quantity;
    for (std::size_t m = 0; m < centers.size(); ++m) {
      report.centers[m] =
          UtilityCenter(m, profile.undertakings, centers, payment, params);
    }
  }
  report.global = report.RecomputeGlobal();
  return report;
}

}  // namespace rdfl

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

#include "equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace rdfl {
namespace {

void ValidateOwners(std::span<const DataOwner> owners) {
  for (const auto& owner : owners) {
    if (!(owner.reported_quality > 0.0) ||
        !std::isfinite(owner.reported_quality)) {
      Fail(ErrorCode::kInvalidQuality, "owner " + std::to_string(owner.id) +
                                           " has non-positive quality");
    }
    if (!(owner.capacity > 0.0)) {
      Fail(ErrorCode::kInvalidArgument,
           "owner " + std::to_string(owner.id) + " has non-positive capacity");
    }
  }
}

void ValidateCenters(std::span<const ComputeCenter> centers) {
  for (const auto& center : centers) {
    if (!(center.sigma > 0.0) || !std::isfinite(center.sigma)) {
      Fail(ErrorCode::kInvalidArgument,
           "center " + std::to_string(center.id) + " has non-positive sigma");
    }
    if (center.capacity < 0.0) {
      Fail(ErrorCode::kInvalidArgument,
           "center " + std::to_string(center.id) + " has negative capacity");
    }
  }
}

std::vector<double> Qualities(std::span<const DataOwner> owners) {
  std::vector<double> f;
  f.reserve(owners.size());
  for (const auto& owner : owners) f.push_back(owner.reported_quality);
  return f;
}

double RawUndertaking(double sigma, double sigma_sum, std::size_t count,
                      double total_payment, const MarketParams& params) {
  const double k = static_cast<double>(count) - 1.0;
  return params.lambda * k * total_payment / (params.epsilon * sigma_sum) *
         (1.0 - sigma * k / sigma_sum);
}

// Evenly spaced points 0, upper/(steps-1), ..., upper.
template <typename Fn>
double BestOnGrid(double upper, std::size_t steps, Fn&& utility) {
  double best = -INFINITY;
  for (std::size_t i = 0; i < steps; ++i) {
    const double v = upper * static_cast<double>(i) /
                     static_cast<double>(steps - 1);
    best = std::max(best, utility(v));
  }
  return best;
}

}  // namespace

const char* DropReasonName(DropReason reason) {
  switch (reason) {
    case DropReason::kBelowQualityThreshold:
      return "below-quality-threshold";
    case DropReason::kNonPositiveResponse:
      return "non-positive-response";
  }
  return "unknown";
}

SolverIntermediates ResponseCoefficients(std::span<const double> qualities,
                                         const MarketParams& params) {
  const std::size_t n = qualities.size();
  Require(n >= 2, ErrorCode::kInsufficientParticipants,
          "at least two data owners are required");
  SolverIntermediates out;
  for (double f : qualities) {
    Require(f > 0.0, ErrorCode::kInvalidQuality,
            "data quality must be positive");
    out.inv_quality_sum += 1.0 / f;
  }
  const double k = static_cast<double>(n) - 1.0;
  const double s = out.inv_quality_sum;
  out.response_coeffs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = k / (params.lambda * params.rho * s) *
                     (1.0 - k / (qualities[i] * s));
    out.response_coeffs.push_back(t);
    out.sum_response += t;
    out.participants.push_back(i);
  }
  return out;
}

double OptimalPayment(std::span<const DataOwner> owners,
                      const MarketParams& params) {
  params.Validate();
  Require(params.rho > 0.0, ErrorCode::kNoViableMarket,
          "rho = 0 leaves the owners' response undefined");
  const auto f = Qualities(owners);
  const auto inter = ResponseCoefficients(f, params);
  if (!(inter.sum_response > 0.0)) {
    Fail(ErrorCode::kNoViableMarket, "sum of response coefficients is <= 0");
  }
  return std::max(0.0, params.alpha - 1.0 / inter.sum_response);
}

double BestResponseQuality(std::size_t n, std::span<const DataOwner> owners,
                           double eta, const MarketParams& params) {
  Require(n < owners.size(), ErrorCode::kInvalidArgument,
          "owner index out of range");
  Require(eta >= 0.0, ErrorCode::kInvalidArgument, "payment must be >= 0");
  const auto f = Qualities(owners);
  const auto inter = ResponseCoefficients(f, params);
  return eta * inter.response_coeffs[n];
}

double NashTotalQuality(double eta, std::span<const DataOwner> owners,
                        const MarketParams& params) {
  Require(owners.size() >= 2, ErrorCode::kInsufficientParticipants,
          "at least two data owners are required");
  Require(eta >= 0.0, ErrorCode::kInvalidArgument, "payment must be >= 0");
  double s = 0.0;
  for (const auto& owner : owners) {
    Require(owner.reported_quality > 0.0, ErrorCode::kInvalidQuality,
            "data quality must be positive");
    s += params.lambda * params.rho / owner.reported_quality;
  }
  return (static_cast<double>(owners.size()) - 1.0) * eta / s;
}

double OptimalUndertaking(std::size_t m, std::span<const ComputeCenter> centers,
                          double total_payment, const MarketParams& params) {
  Require(centers.size() >= 2, ErrorCode::kInsufficientParticipants,
          "at least two computing centers are required");
  Require(m < centers.size(), ErrorCode::kInvalidArgument,
          "center index out of range");
  Require(total_payment >= 0.0, ErrorCode::kInvalidArgument,
          "total training payment must be >= 0");
  double sigma_sum = 0.0;
  for (const auto& c : centers) sigma_sum += c.sigma;
  return std::max(0.0, RawUndertaking(centers[m].sigma, sigma_sum,
                                      centers.size(), total_payment, params));
}

std::vector<double> EquilibriumUndertakings(
    std::span<const ComputeCenter> centers, double total_payment,
    const MarketParams& params, std::vector<std::size_t>* clipped) {
  Require(centers.size() >= 2, ErrorCode::kInsufficientParticipants,
          "at least two computing centers are required");
  ValidateCenters(centers);
  std::vector<std::size_t> active(centers.size());
  for (std::size_t m = 0; m < centers.size(); ++m) active[m] = m;

  std::vector<double> d(centers.size(), 0.0);
  while (true) {
    double sigma_sum = 0.0;
    for (std::size_t m : active) sigma_sum += centers[m].sigma;
    std::fill(d.begin(), d.end(), 0.0);
    std::optional<std::size_t> idle;
    for (std::size_t m : active) {
      d[m] = RawUndertaking(centers[m].sigma, sigma_sum, active.size(),
                            total_payment, params);
      // The two cheapest centers always keep a positive share, so the loop
      // never shrinks the game below two players.
      if (d[m] <= 0.0 &&
          (!idle || centers[m].sigma >= centers[*idle].sigma)) {
        idle = m;
      }
    }
    if (!idle || total_payment == 0.0) break;
    std::erase(active, *idle);
  }
  for (double& v : d) v = std::max(0.0, v);

  for (std::size_t m = 0; m < centers.size(); ++m) {
    if (d[m] > centers[m].capacity) {
      d[m] = centers[m].capacity;
      if (clipped) clipped->push_back(m);
    }
  }
  return d;
}

namespace {

// Participation pruning and response coefficients shared by both solves.
SneSolution PrepareMarket(std::span<const DataOwner> owners,
                          std::span<const ComputeCenter> centers,
                          const MarketParams& params) {
  params.Validate();
  Require(owners.size() >= 2, ErrorCode::kInsufficientParticipants,
          "at least two data owners are required");
  Require(centers.size() >= 2, ErrorCode::kInsufficientParticipants,
          "at least two computing centers are required");
  Require(centers.size() >= owners.size(), ErrorCode::kInvalidArgument,
          "the market requires at least as many centers as owners (M >= N)");
  Require(params.rho > 0.0, ErrorCode::kNoViableMarket,
          "rho = 0 leaves the owners' response undefined");
  ValidateOwners(owners);
  ValidateCenters(centers);

  SneSolution sol;
  sol.owners.assign(owners.begin(), owners.end());
  sol.centers.assign(centers.begin(), centers.end());
  sol.params = params;

  std::vector<std::size_t> participants;
  for (std::size_t n = 0; n < owners.size(); ++n) {
    if (owners[n].reported_quality >= params.xi) {
      participants.push_back(n);
    } else {
      sol.dropped_owners.push_back({n, DropReason::kBelowQualityThreshold});
    }
  }

  SolverIntermediates inter;
  while (true) {
    if (participants.size() < 2) {
      Fail(ErrorCode::kNoViableMarket,
           "fewer than two data owners remain after participation pruning");
    }
    std::vector<double> f;
    for (std::size_t n : participants) f.push_back(owners[n].reported_quality);
    inter = ResponseCoefficients(f, params);

    // T_n is increasing in f_n, so the lowest-quality owner is the first to
    // lose a positive response.
    std::optional<std::size_t> worst;
    for (std::size_t k = 0; k < participants.size(); ++k) {
      if (inter.response_coeffs[k] <= 0.0 &&
          (!worst || f[k] < f[*worst])) {
        worst = k;
      }
    }
    if (!worst) break;
    sol.dropped_owners.push_back(
        {participants[*worst], DropReason::kNonPositiveResponse});
    participants.erase(participants.begin() +
                       static_cast<std::ptrdiff_t>(*worst));
  }

  // Re-index the coefficients over the full owner list.
  std::vector<double> coeffs(owners.size(), 0.0);
  for (std::size_t k = 0; k < participants.size(); ++k) {
    coeffs[participants[k]] = inter.response_coeffs[k];
  }
  inter.response_coeffs = std::move(coeffs);
  inter.participants = participants;
  if (!(inter.sum_response > 0.0)) {
    Fail(ErrorCode::kNoViableMarket, "sum of response coefficients is <= 0");
  }
  sol.intermediates = std::move(inter);
  return sol;
}

void FillProfile(SneSolution& sol, double eta) {
  const auto& params = sol.params;
  StrategyProfile& profile = sol.profile;
  profile.eta = eta;
  profile.contributions.assign(sol.owners.size(), OwnerContribution{});
  double total_quantity = 0.0;
  for (std::size_t n : sol.intermediates.participants) {
    const double f = sol.owners[n].reported_quality;
    double q = eta * sol.intermediates.response_coeffs[n];
    double x = q / f;
    if (x >= sol.owners[n].capacity) {
      x = sol.owners[n].capacity * kCapacityClipFactor;
      q = f * x;
      sol.clipped_owners.push_back(n);
    }
    profile.contributions[n] = {q, x};
    sol.owners[n].chosen_quantity = x;
    total_quantity += x;
  }

  profile.undertakings = EquilibriumUndertakings(
      sol.centers, params.rho * total_quantity, params, &sol.clipped_centers);
  for (std::size_t m = 0; m < sol.centers.size(); ++m) {
    sol.centers[m].undertaken = profile.undertakings[m];
    if (profile.undertakings[m] == 0.0) sol.idle_centers.push_back(m);
  }
  profile.utilities =
      EvaluateUtilities(profile, sol.owners, sol.centers, params);
}

}  // namespace

SneSolution SolveSne(std::span<const DataOwner> owners,
                     std::span<const ComputeCenter> centers,
                     const MarketParams& params) {
  SneSolution sol = PrepareMarket(owners, centers, params);
  const double eta =
      std::max(0.0, params.alpha - 1.0 / sol.intermediates.sum_response);
  if (eta <= 0.0) {
    Fail(ErrorCode::kNoViableMarket,
         "optimal payment is zero: alpha is below 1 / sum of response "
         "coefficients, so no owner contributes");
  }
  FillProfile(sol, eta);
  return sol;
}

SneSolution SolveFollowers(std::span<const DataOwner> owners,
                           std::span<const ComputeCenter> centers,
                           const MarketParams& params, double eta) {
  Require(eta >= 0.0 && std::isfinite(eta), ErrorCode::kInvalidArgument,
          "payment must be >= 0");
  SneSolution sol = PrepareMarket(owners, centers, params);
  FillProfile(sol, eta);
  return sol;
}

double VerificationReport::MaxGain() const {
  return std::max({server_gain, max_owner_gain, max_center_gain});
}

VerificationReport VerifySne(const SneSolution& solution,
                             std::size_t grid_steps, double tolerance) {
  Require(grid_steps >= 100, ErrorCode::kInvalidArgument,
          "verification grid needs at least 100 points");
  const auto& params = solution.params;
  const auto& profile = solution.profile;
  const auto& owners = solution.owners;
  const auto& inter = solution.intermediates;

  VerificationReport report;
  report.grid_steps = grid_steps;
  report.tolerance = tolerance;

  // (a) Leader: eta deviations with the owners re-solving their responses.
  auto total_quality_at = [&](double eta) {
    double total = 0.0;
    for (std::size_t n : inter.participants) {
      const double bound =
          owners[n].reported_quality * owners[n].capacity * kCapacityClipFactor;
      total += std::min(eta * inter.response_coeffs[n], bound);
    }
    return total;
  };
  auto server_utility = [&](double eta) {
    return params.alpha * ModelQuality(total_quality_at(eta)) - eta;
  };
  {
    const double upper = profile.eta > 0.0 ? 2.0 * profile.eta : params.alpha;
    const double best = BestOnGrid(upper, grid_steps, server_utility);
    report.server_gain = std::max(0.0, best - server_utility(profile.eta));
  }

  // (b) Owners: unilateral q_n deviations with eta and q_-n fixed.
  const double total_q = profile.TotalQuality();
  double max_q = 0.0;
  for (const auto& c : profile.contributions) max_q = std::max(max_q, c.quality);
  report.owner_gains.assign(owners.size(), 0.0);
  for (std::size_t n = 0; n < owners.size(); ++n) {
    const bool excluded = std::any_of(
        solution.dropped_owners.begin(), solution.dropped_owners.end(),
        [n](const DroppedOwner& d) {
          return d.owner == n && d.reason == DropReason::kBelowQualityThreshold;
        });
    if (excluded) continue;
    const double f = owners[n].reported_quality;
    const double q_star = profile.contributions[n].quality;
    const double others = total_q - q_star;
    auto utility = [&](double q) {
      if (q <= 0.0) return 0.0;
      return q / (q + others) * profile.eta -
             params.lambda * params.rho * q / f;
    };
    const double bound = f * owners[n].capacity;
    const double upper =
        std::min(q_star > 0.0 ? 2.0 * q_star : 2.0 * max_q, bound);
    const double best = BestOnGrid(upper, grid_steps, utility);
    report.owner_gains[n] = std::max(0.0, best - utility(q_star));
    report.max_owner_gain = std::max(report.max_owner_gain,
                                     report.owner_gains[n]);
  }

  // (c) Centers: unilateral d_m deviations with the other centers fixed.
  double total_x = 0.0;
  for (const auto& c : profile.contributions) total_x += c.quantity;
  const double payment = params.rho * total_x;
  double total_d = 0.0;
  double max_d = 0.0;
  for (double d : profile.undertakings) {
    total_d += d;
    max_d = std::max(max_d, d);
  }
  report.center_gains.assign(solution.centers.size(), 0.0);
  for (std::size_t m = 0; m < solution.centers.size(); ++m) {
    const double d_star = profile.undertakings[m];
    const double others = total_d - d_star;
    const double cost = params.epsilon * solution.centers[m].sigma;
    auto utility = [&](double d) {
      if (d <= 0.0) return 0.0;
      return params.lambda * d / (d + others) * payment - cost * d;
    };
    const double upper = std::min(d_star > 0.0 ? 2.0 * d_star : 2.0 * max_d,
                                  solution.centers[m].capacity);
    const double best = BestOnGrid(upper, grid_steps, utility);
    report.center_gains[m] = std::max(0.0, best - utility(d_star));
    report.max_center_gain = std::max(report.max_center_gain,
                                      report.center_gains[m]);
  }
  return report;
}

}  // namespace rdfl

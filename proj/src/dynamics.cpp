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

#include "dynamics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "error.hpp"

namespace rdfl {

const OwnerQuality* QualityAssessment::Find(std::size_t owner) const {
  for (const auto& e : entries) {
    if (e.owner == owner) return &e;
  }
  return nullptr;
}

QualityAssessment EvaluateQuality(const RoundRecord& record, double xi) {
  QualityAssessment out;
  if (record.centers.empty()) return out;
  double lo = record.centers.front().quality;
  double hi = lo;
  for (const auto& c : record.centers) {
    lo = std::min(lo, c.quality);
    hi = std::max(hi, c.quality);
  }
  for (const auto& c : record.centers) {
    OwnerQuality q;
    q.owner = c.owner;
    q.center = c.center;
    q.raw = c.quality;
    q.normalized = hi > lo ? (c.quality - lo) / (hi - lo) : 1.0;
    q.normalized = std::max(q.normalized, kQualityFloor);
    q.excluded = q.normalized < xi;
    out.entries.push_back(q);
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const OwnerQuality& a, const OwnerQuality& b) {
              return a.owner < b.owner;
            });
  return out;
}

void PaymentLedger::Add(const Payment& payment) {
  Require(payment.amount >= 0.0, ErrorCode::kInvalidArgument,
          "ledger amounts must be >= 0");
  entries_.push_back(payment);
}

void PaymentLedger::Append(const std::vector<Payment>& payments) {
  for (const auto& p : payments) Add(p);
}

double PaymentLedger::Total() const {
  double total = 0.0;
  for (const auto& p : entries_) total += p.amount;
  return total;
}

double PaymentLedger::PaidBy(std::size_t owner) const {
  double total = 0.0;
  for (const auto& p : entries_) {
    if (p.payer == owner) total += p.amount;
  }
  return total;
}

double PaymentLedger::ReceivedBy(std::size_t center) const {
  double total = 0.0;
  for (const auto& p : entries_) {
    if (p.payee == center) total += p.amount;
  }
  return total;
}

void PaymentLedger::WriteCsv(std::ostream& out) const {
  out << "round,payer,payee,amount\n";
  char buf[32];
  for (const auto& p : entries_) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.amount);
    out << p.round << ",D" << p.payer + 1 << ",C" << p.payee + 1 << ','
        << buf << '\n';
  }
}

Readjustment Readjust(const SneSolution& solution,
                      const QualityAssessment& assessment,
                      const Matching& matching, std::size_t round) {
  Require(!assessment.entries.empty(), ErrorCode::kInvalidArgument,
          "quality assessment is empty");

  // Reduced market of the assessed owners, with assessed qualities.
  std::vector<std::size_t> subset;
  std::vector<DataOwner> reduced;
  for (const auto& e : assessment.entries) {
    Require(e.owner < solution.owners.size(), ErrorCode::kInvalidArgument,
            "assessment refers to an unknown owner");
    subset.push_back(e.owner);
    DataOwner owner = solution.owners[e.owner];
    owner.reported_quality = e.normalized;
    reduced.push_back(owner);
  }
  if (reduced.size() < 2) {
    Fail(ErrorCode::kNoViableMarket,
         "fewer than two assessed owners remain in the market");
  }
  const SneSolution local =
      SolveSne(reduced, solution.centers, solution.params);

  // Lift the reduced solution back to full owner indexing.
  Readjustment out;
  SneSolution& next = out.solution;
  next.params = solution.params;
  next.centers = local.centers;
  next.owners = solution.owners;
  for (auto& owner : next.owners) owner.chosen_quantity = 0.0;
  next.profile.eta = local.profile.eta;
  next.profile.contributions.assign(solution.owners.size(),
                                    OwnerContribution{});
  next.profile.undertakings = local.profile.undertakings;
  next.intermediates.inv_quality_sum = local.intermediates.inv_quality_sum;
  next.intermediates.sum_response = local.intermediates.sum_response;
  next.intermediates.response_coeffs.assign(solution.owners.size(), 0.0);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const std::size_t n = subset[k];
    next.owners[n].reported_quality = reduced[k].reported_quality;
    next.owners[n].chosen_quantity = local.owners[k].chosen_quantity;
    next.profile.contributions[n] = local.profile.contributions[k];
    next.intermediates.response_coeffs[n] =
        local.intermediates.response_coeffs[k];
  }
  for (std::size_t k : local.intermediates.participants) {
    next.intermediates.participants.push_back(subset[k]);
  }
  std::sort(next.intermediates.participants.begin(),
            next.intermediates.participants.end());
  // Owners that were never assessed stay out of the market.
  for (std::size_t n = 0; n < solution.owners.size(); ++n) {
    if (std::find(subset.begin(), subset.end(), n) == subset.end()) {
      next.dropped_owners.push_back({n, DropReason::kNonPositiveResponse});
    }
  }
  for (const auto& d : local.dropped_owners) {
    next.dropped_owners.push_back({subset[d.owner], d.reason});
    out.excluded_owners.push_back(subset[d.owner]);
  }
  std::sort(out.excluded_owners.begin(), out.excluded_owners.end());
  for (std::size_t k : local.clipped_owners) {
    next.clipped_owners.push_back(subset[k]);
    out.clipped_owners.push_back(subset[k]);
  }
  next.idle_centers = local.idle_centers;
  next.clipped_centers = local.clipped_centers;
  next.profile.matching = matching;
  next.profile.utilities = EvaluateUtilities(next.profile, next.owners,
                                             next.centers, next.params);

  for (std::size_t n : next.intermediates.participants) {
    const double before = solution.profile.contributions[n].quantity;
    const double after = next.profile.contributions[n].quantity;
    if (after > before) {
      const auto center = matching.CenterOf(n);
      Require(center.has_value(), ErrorCode::kInvalidArgument,
              "an assessed owner has no matched center");
      out.payments.push_back(
          {round, n, *center, solution.params.rho * (after - before)});
    }
  }
  return out;
}

}  // namespace rdfl

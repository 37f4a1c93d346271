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

// Mid-run strategy adjustment: realized loss-delta qualities replace the
// reported ones, the payment and quantities are re-solved, and owners that
// now provide more data pay the extra training fee to their center.

#ifndef RDFL_DYNAMICS_HPP_
#define RDFL_DYNAMICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "equilibrium.hpp"
#include "market.hpp"
#include "training.hpp"

namespace rdfl {

// Normalized qualities are floored here before any 1/f use.
inline constexpr double kQualityFloor = 1e-6;

struct OwnerQuality {
  std::size_t owner = 0;
  std::size_t center = 0;
  double raw = 0.0;         // f_m of the matched center
  double normalized = 0.0;  // min-max scaled, floored at kQualityFloor
  bool excluded = false;    // normalized < xi
};

struct QualityAssessment {
  std::vector<OwnerQuality> entries;  // ascending owner index

  const OwnerQuality* Find(std::size_t owner) const;
};

// Maps each center's f_m to its owner and min-max normalizes to [0, 1]. When
// every raw value is equal, every owner gets 1.
QualityAssessment EvaluateQuality(const RoundRecord& record, double xi);

class PaymentLedger {
 public:
  void Add(const Payment& payment);
  void Append(const std::vector<Payment>& payments);

  const std::vector<Payment>& entries() const { return entries_; }
  double Total() const;
  double PaidBy(std::size_t owner) const;
  double ReceivedBy(std::size_t center) const;

  // Header "round,payer,payee,amount"; payer/payee are one-based ids.
  void WriteCsv(std::ostream& out) const;

 private:
  std::vector<Payment> entries_;
};

struct Readjustment {
  SneSolution solution;
  std::vector<Payment> payments;           // one per owner whose x* grew
  std::vector<std::size_t> excluded_owners;  // left the market at this round
  std::vector<std::size_t> clipped_owners;   // x* hit the owner's capacity
};

// Re-solves eta* and x* with the assessed qualities in place of the reported
// ones. Only assessed owners take part; the matching is carried over
// unchanged. Throws Error(kNoViableMarket) if fewer than two owners remain.
Readjustment Readjust(const SneSolution& solution,
                      const QualityAssessment& assessment,
                      const Matching& matching, std::size_t round);

}  // namespace rdfl

#endif  // RDFL_DYNAMICS_HPP_

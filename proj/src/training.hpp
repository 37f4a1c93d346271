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

// Synthetic owner datasets, local client updates and global aggregation.
//
// Each owner holds a pool of samples from a shared Gaussian class-blob task.
// Features are clipped to [0, 1] before Gaussian noise of the owner's
// intensity is added, so the measured quality 1 - MSE(noisy, clean) lies in
// [0, 1] for moderate noise.

#ifndef RDFL_TRAINING_HPP_
#define RDFL_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "market.hpp"

namespace rdfl {

struct OwnerDataset {
  std::size_t owner = 0;  // owner index
  int owner_id = 0;
  std::size_t dims = 0;
  std::size_t classes = 0;
  std::vector<double> features;        // noisy, row-major (sample, dim)
  std::vector<double> clean_features;  // same layout, before noise
  std::vector<int> labels;
  double noise_intensity = 0.0;
  double initial_quality = 1.0;
  bool quality_clamped = false;  // MSE exceeded 1

  std::size_t size() const { return labels.size(); }
  std::span<const double> Row(std::size_t i) const {
    return {features.data() + i * dims, dims};
  }
};

OwnerDataset GenerateOwnerData(std::uint64_t seed, std::size_t owner_index,
                               const DataOwner& owner, double noise_intensity,
                               std::size_t samples, std::size_t dims,
                               std::size_t classes);

// Noise-free samples of the same task, used to score the global model.
OwnerDataset GenerateValidationData(std::uint64_t seed, std::size_t samples,
                                    std::size_t dims, std::size_t classes);

// Copy of the rows of `pool` listed in `rows`; quality metadata is kept.
OwnerDataset Subset(const OwnerDataset& pool, std::span<const std::size_t> rows);

// One CSV row per sample: owner id, features..., label.
void WriteDatasetCsv(std::ostream& out, std::span<const OwnerDataset> sets);

struct ModelState {
  std::vector<double> w;
  std::size_t round = 0;

  bool operator==(const ModelState&) const = default;
};

enum class Aggregation { kUnweightedMean, kQuantityWeighted };
enum class TrainerKind { kAnalytic, kGradient };

struct TrainerConfig {
  std::size_t rounds = 10;        // T
  std::size_t local_epochs = 3;   // E
  double learning_rate = 0.01;    // beta
  std::size_t adjust_round = 3;   // L
  bool dynamic_adjustment = true;
  Aggregation aggregation = Aggregation::kUnweightedMean;
  TrainerKind trainer = TrainerKind::kAnalytic;
  double analytic_initial_loss = 1.0;  // l_0
  double analytic_rate = 1.0;          // kappa
  std::size_t dims = 10;
  std::size_t classes = 3;
  double samples_per_unit = 100.0;  // samples transferred per unit of x_n
  std::size_t validation_samples = 600;
  std::size_t threads = 1;

  void Validate() const;
};

// Length of the flat parameter vector of the softmax model.
inline std::size_t ModelDimension(std::size_t dims, std::size_t classes) {
  return classes * (dims + 1);
}

// Mean multinomial cross-entropy of softmax(W x + b). `w` stores, per class,
// `dims` weights followed by the bias.
double SoftmaxLoss(std::span<const double> w, const OwnerDataset& data);

// Gradient of SoftmaxLoss with respect to `w`.
std::vector<double> SoftmaxGradient(std::span<const double> w,
                                    const OwnerDataset& data);

struct ClientResult {
  std::vector<double> w;
  double loss_start = 0.0;  // loss(t_s)
  double loss_end = 0.0;    // loss(t_e)
  double quality = 0.0;     // f_m = loss(t_s) - loss(t_e)
};

// Runs E local epochs from `global`. The analytic trainer reports
// loss(t) = l_0 exp(-kappa * quality * t) with t_s = 0 and t_e = 1 and leaves
// the parameters untouched; the gradient trainer runs full-batch gradient
// descent on the softmax loss.
ClientResult ClientUpdate(const OwnerDataset& data, const ModelState& global,
                          const TrainerConfig& config);

// Unweighted mean, or sum_i p_i w_i with p_i = x_i / sum x.
ModelState Aggregate(std::span<const std::vector<double>> locals,
                     std::span<const double> quantities, Aggregation mode,
                     std::size_t round);

struct CenterRecord {
  std::size_t center = 0;
  std::size_t owner = 0;
  std::size_t samples = 0;
  std::vector<double> w;
  double loss_start = 0.0;
  double loss_end = 0.0;
  double quality = 0.0;  // f_m

  bool operator==(const CenterRecord&) const = default;
};

struct RoundRecord {
  std::size_t round = 0;
  std::vector<CenterRecord> centers;  // ascending center index
  double global_loss = 0.0;
  std::vector<Payment> payments;

  bool operator==(const RoundRecord&) const = default;
};

}  // namespace rdfl

#endif  // RDFL_TRAINING_HPP_

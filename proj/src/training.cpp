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

#include "training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "error.hpp"
#include "random.hpp"

namespace rdfl {
namespace {

constexpr double kClassCenterLow = 0.25;
constexpr double kClassCenterHigh = 0.75;
constexpr double kClassSpread = 0.12;

std::vector<double> ClassCenters(std::uint64_t seed, std::size_t dims,
                                 std::size_t classes) {
  Rng rng = MakeRng(seed, kStreamTask);
  std::uniform_real_distribution<double> u(kClassCenterLow, kClassCenterHigh);
  std::vector<double> centers(dims * classes);
  for (double& c : centers) c = u(rng);
  return centers;
}

OwnerDataset Sample(Rng& rng, const std::vector<double>& class_centers,
                    double noise, std::size_t samples, std::size_t dims,
                    std::size_t classes) {
  OwnerDataset data;
  data.dims = dims;
  data.classes = classes;
  data.noise_intensity = noise;
  data.features.resize(samples * dims);
  data.clean_features.resize(samples * dims);
  data.labels.resize(samples);

  std::uniform_int_distribution<int> pick(0, static_cast<int>(classes) - 1);
  std::normal_distribution<double> spread(0.0, kClassSpread);
  std::normal_distribution<double> jitter(0.0, 1.0);
  double squared_error = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const int label = pick(rng);
    data.labels[i] = label;
    for (std::size_t j = 0; j < dims; ++j) {
      const double mean = class_centers[static_cast<std::size_t>(label) * dims + j];
      const double clean = std::clamp(mean + spread(rng), 0.0, 1.0);
      const double noisy = clean + noise * jitter(rng);
      data.clean_features[i * dims + j] = clean;
      data.features[i * dims + j] = noisy;
      squared_error += (noisy - clean) * (noisy - clean);
    }
  }
  const double mse = squared_error / static_cast<double>(samples * dims);
  data.initial_quality = 1.0 - mse;
  if (data.initial_quality < 0.0) {
    data.initial_quality = 0.0;
    data.quality_clamped = true;
  }
  return data;
}

void CheckFinite(double loss) {
  if (!std::isfinite(loss)) {
    Fail(ErrorCode::kTrainingDivergence, "local training produced a non-finite loss");
  }
}

}  // namespace

OwnerDataset GenerateOwnerData(std::uint64_t seed, std::size_t owner_index,
                               const DataOwner& owner, double noise_intensity,
                               std::size_t samples, std::size_t dims,
                               std::size_t classes) {
  Require(samples >= 1, ErrorCode::kInvalidArgument, "samples must be >= 1");
  Require(classes >= 2, ErrorCode::kInvalidArgument, "classes must be >= 2");
  Require(dims >= 1, ErrorCode::kInvalidArgument, "dims must be >= 1");
  Require(noise_intensity >= 0.0 && std::isfinite(noise_intensity),
          ErrorCode::kInvalidArgument, "noise intensity must be >= 0");
  const auto centers = ClassCenters(seed, dims, classes);
  Rng rng = MakeRng(seed, kStreamOwnerData, owner_index);
  OwnerDataset data =
      Sample(rng, centers, noise_intensity, samples, dims, classes);
  data.owner = owner_index;
  data.owner_id = owner.id;
  return data;
}

OwnerDataset GenerateValidationData(std::uint64_t seed, std::size_t samples,
                                    std::size_t dims, std::size_t classes) {
  Require(samples >= 1 && classes >= 2 && dims >= 1,
          ErrorCode::kInvalidArgument, "invalid validation set shape");
  const auto centers = ClassCenters(seed, dims, classes);
  Rng rng = MakeRng(seed, kStreamValidation);
  return Sample(rng, centers, 0.0, samples, dims, classes);
}

OwnerDataset Subset(const OwnerDataset& pool,
                    std::span<const std::size_t> rows) {
  OwnerDataset out;
  out.owner = pool.owner;
  out.owner_id = pool.owner_id;
  out.dims = pool.dims;
  out.classes = pool.classes;
  out.noise_intensity = pool.noise_intensity;
  out.initial_quality = pool.initial_quality;
  out.quality_clamped = pool.quality_clamped;
  out.features.reserve(rows.size() * pool.dims);
  out.clean_features.reserve(rows.size() * pool.dims);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    Require(r < pool.size(), ErrorCode::kInvalidArgument,
            "subset row out of range");
    const auto first = static_cast<std::ptrdiff_t>(r * pool.dims);
    const auto last = first + static_cast<std::ptrdiff_t>(pool.dims);
    out.features.insert(out.features.end(), pool.features.begin() + first,
                        pool.features.begin() + last);
    out.clean_features.insert(out.clean_features.end(),
                              pool.clean_features.begin() + first,
                              pool.clean_features.begin() + last);
    out.labels.push_back(pool.labels[r]);
  }
  return out;
}

void WriteDatasetCsv(std::ostream& out, std::span<const OwnerDataset> sets) {
  const std::size_t dims = sets.empty() ? 0 : sets.front().dims;
  out << "owner";
  for (std::size_t j = 0; j < dims; ++j) out << ",x" << j;
  out << ",label\n";
  char buf[32];
  for (const auto& set : sets) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      out << set.owner_id;
      for (double v : set.Row(i)) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
      }
      out << ',' << set.labels[i] << '\n';
    }
  }
}

void TrainerConfig::Validate() const {
  Require(rounds >= 1, ErrorCode::kInvalidArgument, "trainer.rounds must be >= 1");
  Require(adjust_round >= 1 && adjust_round <= rounds,
          ErrorCode::kInvalidArgument,
          "trainer.adjust_round must lie in [1, trainer.rounds]");
  Require(local_epochs >= 1, ErrorCode::kInvalidArgument,
          "trainer.local_epochs must be >= 1");
  Require(learning_rate > 0.0 && std::isfinite(learning_rate),
          ErrorCode::kInvalidArgument, "trainer.learning_rate must be > 0");
  Require(dims >= 1 && classes >= 2, ErrorCode::kInvalidArgument,
          "trainer.dims must be >= 1 and trainer.classes >= 2");
  Require(samples_per_unit > 0.0, ErrorCode::kInvalidArgument,
          "trainer.samples_per_unit must be > 0");
  Require(analytic_initial_loss > 0.0 && analytic_rate >= 0.0,
          ErrorCode::kInvalidArgument,
          "analytic trainer needs l_0 > 0 and kappa >= 0");
  Require(validation_samples >= 1, ErrorCode::kInvalidArgument,
          "trainer.validation_samples must be >= 1");
}

namespace {

// Softmax probabilities of sample i, written into `p`; returns the sample
// loss.
double Forward(std::span<const double> w, const OwnerDataset& data,
               std::size_t i, std::vector<double>& p) {
  const std::size_t dims = data.dims;
  const std::size_t stride = dims + 1;
  const auto x = data.Row(i);
  double max_logit = -INFINITY;
  for (std::size_t c = 0; c < data.classes; ++c) {
    double z = w[c * stride + dims];
    for (std::size_t j = 0; j < dims; ++j) z += w[c * stride + j] * x[j];
    p[c] = z;
    max_logit = std::max(max_logit, z);
  }
  double norm = 0.0;
  for (std::size_t c = 0; c < data.classes; ++c) {
    p[c] = std::exp(p[c] - max_logit);
    norm += p[c];
  }
  for (std::size_t c = 0; c < data.classes; ++c) p[c] /= norm;
  const auto y = static_cast<std::size_t>(data.labels[i]);
  return -std::log(std::max(p[y], 1e-300));
}

}  // namespace

double SoftmaxLoss(std::span<const double> w, const OwnerDataset& data) {
  Require(w.size() == ModelDimension(data.dims, data.classes),
          ErrorCode::kInvalidArgument, "parameter vector has the wrong size");
  Require(data.size() > 0, ErrorCode::kInvalidArgument, "dataset is empty");
  std::vector<double> p(data.classes);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += Forward(w, data, i, p);
  return total / static_cast<double>(data.size());
}

std::vector<double> SoftmaxGradient(std::span<const double> w,
                                    const OwnerDataset& data) {
  Require(w.size() == ModelDimension(data.dims, data.classes),
          ErrorCode::kInvalidArgument, "parameter vector has the wrong size");
  Require(data.size() > 0, ErrorCode::kInvalidArgument, "dataset is empty");
  const std::size_t dims = data.dims;
  const std::size_t stride = dims + 1;
  std::vector<double> grad(w.size(), 0.0);
  std::vector<double> p(data.classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    Forward(w, data, i, p);
    const auto x = data.Row(i);
    const auto y = static_cast<std::size_t>(data.labels[i]);
    for (std::size_t c = 0; c < data.classes; ++c) {
      const double residual = p[c] - (c == y ? 1.0 : 0.0);
      for (std::size_t j = 0; j < dims; ++j) {
        grad[c * stride + j] += residual * x[j];
      }
      grad[c * stride + dims] += residual;
    }
  }
  const double scale = 1.0 / static_cast<double>(data.size());
  for (double& g : grad) g *= scale;
  return grad;
}

ClientResult ClientUpdate(const OwnerDataset& data, const ModelState& global,
                          const TrainerConfig& config) {
  Require(data.size() > 0, ErrorCode::kInvalidArgument,
          "client dataset is empty");
  ClientResult out;
  out.w = global.w;
  if (config.trainer == TrainerKind::kAnalytic) {
    // t runs from t_s = 0 before the first epoch to t_e = 1 after the last.
    const double l0 = config.analytic_initial_loss;
    const double rate = config.analytic_rate * data.initial_quality;
    out.loss_start = l0;
    out.loss_end = l0 * std::exp(-rate);
  } else {
    out.loss_start = SoftmaxLoss(out.w, data);
    CheckFinite(out.loss_start);
    for (std::size_t epoch = 0; epoch < config.local_epochs; ++epoch) {
      const auto grad = SoftmaxGradient(out.w, data);
      for (std::size_t k = 0; k < out.w.size(); ++k) {
        out.w[k] -= config.learning_rate * grad[k];
      }
    }
    out.loss_end = SoftmaxLoss(out.w, data);
  }
  CheckFinite(out.loss_end);
  out.quality = out.loss_start - out.loss_end;
  return out;
}

ModelState Aggregate(std::span<const std::vector<double>> locals,
                     std::span<const double> quantities, Aggregation mode,
                     std::size_t round) {
  Require(!locals.empty(), ErrorCode::kInvalidArgument,
          "aggregation needs at least one local model");
  const std::size_t dim = locals.front().size();
  for (const auto& w : locals) {
    Require(w.size() == dim, ErrorCode::kInvalidArgument,
            "local models have different dimensions");
  }
  std::vector<double> weights(locals.size(),
                              1.0 / static_cast<double>(locals.size()));
  if (mode == Aggregation::kQuantityWeighted) {
    Require(quantities.size() == locals.size(), ErrorCode::kInvalidArgument,
            "one quantity per local model is required");
    double total = 0.0;
    for (double x : quantities) {
      Require(x >= 0.0, ErrorCode::kInvalidArgument,
              "quantities must be >= 0");
      total += x;
    }
    Require(total > 0.0, ErrorCode::kDegenerateMarket,
            "total quantity is zero; aggregation weights are undefined");
    for (std::size_t i = 0; i < locals.size(); ++i) {
      weights[i] = quantities[i] / total;
    }
  }
  ModelState out;
  out.round = round;
  out.w.assign(dim, 0.0);
  for (std::size_t i = 0; i < locals.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) out.w[k] += weights[i] * locals[i][k];
  }
  return out;
}

}  // namespace rdfl

// Copyright 2026 The specmask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// PCA feature reduction: a frozen mean-centering projection in front of a
// small trainable head.

#ifndef SPECMASK_REDUCE_HPP_
#define SPECMASK_REDUCE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "specmask/cnn.hpp"
#include "specmask/data.hpp"
#include "specmask/numerics.hpp"

namespace specmask {

struct PcaProjector {
  std::size_t input_dim = 0;   // D
  std::size_t components = 0;  // d
  std::vector<float> mean;     // D
  Matrix basis;                // D x d, columns are principal directions
  std::vector<double> explained;  // d variance ratios, descending
  std::vector<double> spectrum;   // all D variance ratios, descending

  void validate() const;
};

// Top-d eigenvectors of the (population) covariance of train_features.
PcaProjector fit_pca(const Matrix& train_features, std::size_t d);
// Uses the train-tagged rows only.
PcaProjector fit_pca(const PixelDataset& dataset, std::size_t d);

// For each threshold t, the smallest k whose cumulative explained ratio
// reaches t (k = D if rounding keeps the full sum just below t).
std::vector<std::size_t> explained_variance_report(const PcaProjector& projector,
                                                   std::span<const double> thresholds);

// basis^T (x - mean), rounded to float.
std::vector<float> project(const PcaProjector& projector, std::span<const float> pixel);
Matrix project_rows(const PcaProjector& projector, const Matrix& rows);
PixelDataset project_dataset(const PcaProjector& projector, const PixelDataset& dataset);

// Subtracts the mean first (D operations), then one multiply-accumulate per
// basis entry. Templated for the operation-counting tests.
template <typename S>
void project_into(const PcaProjector& projector, std::span<const S> pixel, std::span<S> out) {
  thread_local std::vector<S> centered;
  centered.resize(projector.input_dim);
  for (std::size_t j = 0; j < projector.input_dim; ++j) centered[j] = pixel[j] - S(projector.mean[j]);
  for (std::size_t k = 0; k < projector.components; ++k) {
    S acc = S(0);
    for (std::size_t j = 0; j < projector.input_dim; ++j) {
      acc = acc + centered[j] * S(projector.basis(j, k));
    }
    out[k] = acc;
  }
}

struct ReducedModel {
  PcaProjector projector;  // frozen
  SpectralCnn head;        // input_length == projector.components
};

struct ReducedParamCount {
  std::size_t trainable = 0;    // head only
  std::size_t total = 0;        // head + D*d projection entries
  std::size_t frozen_mean = 0;  // D centering entries, not in total
  std::size_t bytes_at_4b = 0;  // (total + frozen_mean) * 4
};

ReducedParamCount count_params(const ReducedModel& model);

// Head via build_conv_head over d inputs: a shrunk conv stack when at least
// one kernel fits, otherwise a single affine map (bias-free on request).
ReducedModel build_reduced_model(const PcaProjector& projector, const HeadOptions& options = {});

std::vector<double> forward(const ReducedModel& model, std::span<const float> pixel);
std::size_t predict(const ReducedModel& model, std::span<const float> pixel);
double accuracy(const ReducedModel& model, const PixelDataset& dataset, Split split);

struct ReducedTrainResult {
  ReducedModel model;
  TrainHistory history;
};

// Trains the head on projected rows; the projector is copied through untouched.
ReducedTrainResult train(ReducedModel model, const PixelDataset& dataset, const TrainConfig& config);

}  // namespace specmask

#endif  // SPECMASK_REDUCE_HPP_

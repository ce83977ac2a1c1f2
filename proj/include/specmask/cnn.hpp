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

// Per-pixel 1D spectral CNN: valid convolutions along the band axis, each
// followed by a rectifier and a width-2 max-pool, then one affine map to the
// class scores.

#ifndef SPECMASK_CNN_HPP_
#define SPECMASK_CNN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "specmask/data.hpp"
#include "specmask/numerics.hpp"

namespace specmask {

inline constexpr std::size_t kDefaultKernel = 6;
inline constexpr std::size_t kPoolWidth = 2;
inline constexpr std::size_t kDefaultWidths[] = {6, 12, 18, 24};

// weights laid out out x in x kernel, i.e. an out x (in*kernel) matrix whose
// column index is channel*kernel + tap.
struct Conv1dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  static Conv1dLayer zeros(std::size_t in, std::size_t out, std::size_t kernel);
  std::size_t param_count() const { return out_channels * in_channels * kernel + out_channels; }
};

// W ~= factor_a * factor_b with factor_a out x r and factor_b r x (in*kernel).
struct FactorizedConv1dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t rank = 0;
  Matrix factor_a;
  Matrix factor_b;
  std::vector<float> bias;

  std::size_t param_count() const { return rank * (out_channels + in_channels * kernel) + out_channels; }
};

using ConvLayer = std::variant<Conv1dLayer, FactorizedConv1dLayer>;

struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
};

ConvShape conv_shape(const ConvLayer& layer);
std::size_t param_count(const ConvLayer& layer);

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weights;  // out x in
  std::vector<float> bias;     // empty for a bias-free map

  bool has_bias() const { return !bias.empty(); }
  std::size_t param_count() const { return out * in + bias.size(); }
};

// Spectral length after a valid convolution followed by the pool. A length-1
// map passes through the pool unchanged.
std::size_t conv_output_length(std::size_t length, std::size_t kernel);
std::size_t pool_output_length(std::size_t length);

struct SpectralCnn {
  std::size_t input_length = 0;
  std::vector<ConvLayer> conv_stack;
  DenseLayer dense;
  std::size_t class_count = kClassCount;

  // Length after each conv and after each pool, alternating:
  // conv_0, pool_0, conv_1, pool_1, ...
  std::vector<std::size_t> spectral_lengths() const;
  // Channels x spectral length entering the dense layer.
  std::size_t flatten_length() const;
  // Throws InvalidData on any shape inconsistency or non-finite weight.
  void validate() const;
};

struct HeadOptions {
  std::size_t kernel = kDefaultKernel;
  std::vector<std::size_t> widths{std::begin(kDefaultWidths), std::end(kDefaultWidths)};
  // Only consulted when no convolution fits and the head is a bare affine map.
  bool bias_free_affine = false;
  std::uint64_t seed = 0;
};

// Keeps leading conv layers of the stack while the running spectral length
// is at least the kernel; if none fit, the network is a single affine map.
SpectralCnn build_conv_head(std::size_t input_length, std::size_t classes, const HeadOptions& options);

// Four kernel-6 convolutions of widths 6/12/18/24, each with a pool of 2,
// then dense to `classes`. 4563 parameters for a 112-band input.
SpectralCnn build_default_arch(std::size_t input_length, std::size_t classes = kClassCount,
                               std::uint64_t seed = 0);

// Fan-in uniform init, U(-sqrt(1/fan_in), +sqrt(1/fan_in)); biases zeroed.
void init_weights(SpectralCnn& model, std::uint64_t seed);

struct ParamCount {
  std::size_t trainable = 0;
  std::size_t total = 0;
  std::size_t bytes_at_4b = 0;
};

ParamCount count_params(const SpectralCnn& model);

// Trainable parameters in declaration order: per conv layer (weights, bias)
// or (factor_a, factor_b, bias), then dense (weights, bias).
std::vector<std::span<float>> parameter_blocks(SpectralCnn& model);
std::vector<float> flatten_params(const SpectralCnn& model);
void assign_params(SpectralCnn& model, std::span<const float> values);

// Class probabilities for one normalized pixel.
std::vector<double> forward(const SpectralCnn& model, std::span<const float> pixel);
// Writes class_count probabilities per row into probs (N x class_count).
void forward_batch(const SpectralCnn& model, const Matrix& pixels, MatrixD& probs);
std::size_t predict(const SpectralCnn& model, std::span<const float> pixel);

// Cross-entropy of one labelled pixel; adds d(loss)/d(param) into grad, which
// is laid out like flatten_params.
double loss_and_gradient(const SpectralCnn& model, std::span<const float> pixel, std::size_t label,
                         std::span<double> grad);

struct TrainConfig {
  std::size_t epochs = 2;
  std::size_t batch = 32;
  double step_size = 0.05;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> val_accuracy;  // one per epoch
  std::vector<double> train_loss;    // mean batch cross-entropy per epoch
};

struct TrainResult {
  SpectralCnn model;
  TrainHistory history;
};

// Plain mini-batch gradient descent on softmax cross-entropy. Train rows are
// reshuffled each epoch from the seed.
TrainResult train(SpectralCnn model, const PixelDataset& dataset, const TrainConfig& config);

double accuracy(const SpectralCnn& model, const PixelDataset& dataset, Split split);

}  // namespace specmask

#endif  // SPECMASK_CNN_HPP_

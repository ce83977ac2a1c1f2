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

#include "specmask/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specmask/cnn_kernels.hpp"
#include "specmask/errors.hpp"

namespace specmask {

Conv1dLayer Conv1dLayer::zeros(std::size_t in, std::size_t out, std::size_t kernel) {
  Conv1dLayer l;
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = kernel;
  l.weights.assign(out * in * kernel, 0.0f);
  l.bias.assign(out, 0.0f);
  return l;
}

ConvShape conv_shape(const ConvLayer& layer) {
  return std::visit(
      [](const auto& l) { return ConvShape{l.in_channels, l.out_channels, l.kernel}; }, layer);
}

std::size_t param_count(const ConvLayer& layer) {
  return std::visit([](const auto& l) { return l.param_count(); }, layer);
}

std::size_t conv_output_length(std::size_t length, std::size_t kernel) {
  return length >= kernel ? length - kernel + 1 : 0;
}

std::size_t pool_output_length(std::size_t length) {
  return length == 1 ? 1 : length / kPoolWidth;
}

std::vector<std::size_t> SpectralCnn::spectral_lengths() const {
  std::vector<std::size_t> out;
  std::size_t len = input_length;
  for (const auto& layer : conv_stack) {
    len = conv_output_length(len, conv_shape(layer).kernel);
    out.push_back(len);
    len = pool_output_length(len);
    out.push_back(len);
  }
  return out;
}

std::size_t SpectralCnn::flatten_length() const {
  if (conv_stack.empty()) return input_length;
  const auto lengths = spectral_lengths();
  return conv_shape(conv_stack.back()).out_channels * lengths.back();
}

void SpectralCnn::validate() const {
  if (input_length == 0) throw InvalidData("model input length is zero");
  if (class_count == 0) throw InvalidData("model has zero classes");
  std::size_t channels = 1;
  std::size_t len = input_length;
  for (std::size_t i = 0; i < conv_stack.size(); ++i) {
    const auto& layer = conv_stack[i];
    const auto shape = conv_shape(layer);
    const std::string where = "conv layer " + std::to_string(i);
    if (shape.in_channels != channels) throw InvalidData(where + ": input channel mismatch");
    if (shape.kernel == 0 || shape.out_channels == 0) throw InvalidData(where + ": empty layer");
    if (len < shape.kernel) throw InvalidData(where + ": spectral length shorter than kernel");
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if (l.bias.size() != l.out_channels) throw InvalidData(where + ": bias length mismatch");
          require_finite(l.bias, "conv bias");
          if constexpr (std::is_same_v<L, Conv1dLayer>) {
            if (l.weights.size() != l.out_channels * l.in_channels * l.kernel) {
              throw InvalidData(where + ": weight length mismatch");
            }
            require_finite(l.weights, "conv weights");
          } else {
            if (l.rank == 0 || l.factor_a.rows() != l.out_channels || l.factor_a.cols() != l.rank ||
                l.factor_b.rows() != l.rank || l.factor_b.cols() != l.in_channels * l.kernel) {
              throw InvalidData(where + ": factor shapes inconsistent with rank");
            }
            require_finite(l.factor_a.data(), "conv factor");
            require_finite(l.factor_b.data(), "conv factor");
          }
        },
        layer);
    channels = shape.out_channels;
    len = pool_output_length(conv_output_length(len, shape.kernel));
  }
  if (dense.in != channels * len) throw InvalidData("dense input does not match flatten length");
  if (dense.out != class_count) throw InvalidData("dense output does not match class count");
  if (dense.weights.size() != dense.in * dense.out) throw InvalidData("dense weight length mismatch");
  if (dense.has_bias() && dense.bias.size() != dense.out) throw InvalidData("dense bias length mismatch");
  require_finite(dense.weights, "dense weights");
  require_finite(dense.bias, "dense bias");
}

SpectralCnn build_conv_head(std::size_t input_length, std::size_t classes, const HeadOptions& options) {
  if (input_length == 0) throw InvalidArgument("network input length must be at least 1");
  if (classes == 0) throw InvalidArgument("network needs at least one class");
  if (options.kernel == 0) throw InvalidArgument("kernel must be at least 1");
  SpectralCnn m;
  m.input_length = input_length;
  m.class_count = classes;
  std::size_t channels = 1;
  std::size_t len = input_length;
  for (std::size_t width : options.widths) {
    if (len < options.kernel) break;
    m.conv_stack.emplace_back(Conv1dLayer::zeros(channels, width, options.kernel));
    channels = width;
    len = pool_output_length(conv_output_length(len, options.kernel));
  }
  m.dense.in = channels * len;
  m.dense.out = classes;
  m.dense.weights.assign(m.dense.in * classes, 0.0f);
  const bool bias_free = m.conv_stack.empty() && options.bias_free_affine;
  if (!bias_free) m.dense.bias.assign(classes, 0.0f);
  init_weights(m, options.seed);
  return m;
}

SpectralCnn build_default_arch(std::size_t input_length, std::size_t classes, std::uint64_t seed) {
  HeadOptions opts;
  opts.seed = seed;
  return build_conv_head(input_length, classes, opts);
}

namespace {

void fill_uniform(std::span<float> values, double bound, Rng& rng) {
  for (float& v : values) v = static_cast<float>(rng.uniform(-bound, bound));
}

}  // namespace

void init_weights(SpectralCnn& model, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : model.conv_stack) {
    std::visit(
        [&](auto& l) {
          using L = std::decay_t<decltype(l)>;
          const double bound = std::sqrt(1.0 / static_cast<double>(l.in_channels * l.kernel));
          if constexpr (std::is_same_v<L, Conv1dLayer>) {
            fill_uniform(l.weights, bound, rng);
          } else {
            fill_uniform(l.factor_a.data(), std::sqrt(1.0 / static_cast<double>(l.rank)), rng);
            fill_uniform(l.factor_b.data(), bound, rng);
          }
          std::fill(l.bias.begin(), l.bias.end(), 0.0f);
        },
        layer);
  }
  fill_uniform(model.dense.weights, std::sqrt(1.0 / static_cast<double>(model.dense.in)), rng);
  std::fill(model.dense.bias.begin(), model.dense.bias.end(), 0.0f);
}

ParamCount count_params(const SpectralCnn& model) {
  ParamCount c;
  for (const auto& layer : model.conv_stack) c.trainable += param_count(layer);
  c.trainable += model.dense.param_count();
  c.total = c.trainable;
  c.bytes_at_4b = c.total * 4;
  return c;
}

std::vector<std::span<float>> parameter_blocks(SpectralCnn& model) {
  std::vector<std::span<float>> blocks;
  for (auto& layer : model.conv_stack) {
    std::visit(
        [&](auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Conv1dLayer>) {
            blocks.emplace_back(l.weights);
          } else {
            blocks.push_back(l.factor_a.data());
            blocks.push_back(l.factor_b.data());
          }
          blocks.emplace_back(l.bias);
        },
        layer);
  }
  blocks.emplace_back(model.dense.weights);
  if (model.dense.has_bias()) blocks.emplace_back(model.dense.bias);
  return blocks;
}

std::vector<float> flatten_params(const SpectralCnn& model) {
  std::vector<float> out;
  auto& mut = const_cast<SpectralCnn&>(model);
  for (auto block : parameter_blocks(mut)) out.insert(out.end(), block.begin(), block.end());
  return out;
}

void assign_params(SpectralCnn& model, std::span<const float> values) {
  std::size_t at = 0;
  auto blocks = parameter_blocks(model);
  std::size_t need = 0;
  for (auto b : blocks) need += b.size();
  if (need != values.size()) {
    throw InvalidArgument("assign_params: expected " + std::to_string(need) + " values, got " +
                          std::to_string(values.size()));
  }
  for (auto block : blocks) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), block.size(), block.begin());
    at += block.size();
  }
}

namespace {

void softmax_inplace(std::span<double> scores) {
  double hi = scores[0];
  for (double s : scores) hi = std::max(hi, s);
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - hi);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

void check_pixel(const SpectralCnn& model, std::span<const float> pixel) {
  if (pixel.size() != model.input_length) {
    throw InvalidArgument("forward: pixel has " + std::to_string(pixel.size()) +
                          " features, model expects " + std::to_string(model.input_length));
  }
}

void forward_into(const SpectralCnn& model, std::span<const float> pixel, std::span<double> probs) {
  thread_local std::vector<double> x;
  x.assign(pixel.begin(), pixel.end());
  kernels::logits<double>(model, x, probs);
  softmax_inplace(probs);
}

}  // namespace

std::vector<double> forward(const SpectralCnn& model, std::span<const float> pixel) {
  check_pixel(model, pixel);
  std::vector<double> probs(model.class_count);
  forward_into(model, pixel, probs);
  return probs;
}

void forward_batch(const SpectralCnn& model, const Matrix& pixels, MatrixD& probs) {
  if (pixels.cols() != model.input_length) {
    throw InvalidArgument("forward_batch: feature width does not match model input length");
  }
  probs = MatrixD(pixels.rows(), model.class_count);
  for (std::size_t r = 0; r < pixels.rows(); ++r) forward_into(model, pixels.row(r), probs.row(r));
}

std::size_t predict(const SpectralCnn& model, std::span<const float> pixel) {
  const auto p = forward(model, pixel);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double accuracy(const SpectralCnn& model, const PixelDataset& dataset, Split split) {
  std::size_t hit = 0, total = 0;
  std::vector<double> probs(model.class_count);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.split[i] != split) continue;
    forward_into(model, dataset.features.row(i), probs);
    const auto cls = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    hit += cls == dataset.labels[i];
    ++total;
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace specmask

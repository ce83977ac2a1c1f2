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

// Scalar-generic inference kernels. Production code instantiates them with
// double; tests instantiate them with an operation-counting scalar, so every
// arithmetic step here is one of +, -, * or maximum().

#ifndef SPECMASK_CNN_KERNELS_HPP_
#define SPECMASK_CNN_KERNELS_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "specmask/cnn.hpp"

namespace specmask::kernels {

inline double maximum(double a, double b) { return a < b ? b : a; }

// in: in_channels x length (channel-major); out: out_channels x (length-kernel+1).
template <typename S>
void conv_layer(const Conv1dLayer& layer, std::span<const S> in, std::size_t length, std::span<S> out) {
  const std::size_t k = layer.kernel;
  const std::size_t len_out = length - k + 1;
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    const float* w_o = layer.weights.data() + o * layer.in_channels * k;
    for (std::size_t p = 0; p < len_out; ++p) {
      S acc = S(0);
      for (std::size_t c = 0; c < layer.in_channels; ++c) {
        const S* x = in.data() + c * length + p;
        const float* w = w_o + c * k;
        for (std::size_t t = 0; t < k; ++t) acc = acc + S(w[t]) * x[t];
      }
      out[o * len_out + p] = acc + S(layer.bias[o]);
    }
  }
}

template <typename S>
void conv_layer(const FactorizedConv1dLayer& layer, std::span<const S> in, std::size_t length,
                std::span<S> out) {
  const std::size_t k = layer.kernel;
  const std::size_t len_out = length - k + 1;
  const std::size_t r = layer.rank;
  thread_local std::vector<S> z;
  z.assign(r * len_out, S(0));
  for (std::size_t q = 0; q < r; ++q) {
    auto b_q = layer.factor_b.row(q);
    for (std::size_t p = 0; p < len_out; ++p) {
      S acc = S(0);
      for (std::size_t c = 0; c < layer.in_channels; ++c) {
        const S* x = in.data() + c * length + p;
        for (std::size_t t = 0; t < k; ++t) acc = acc + S(b_q[c * k + t]) * x[t];
      }
      z[q * len_out + p] = acc;
    }
  }
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    auto a_o = layer.factor_a.row(o);
    for (std::size_t p = 0; p < len_out; ++p) {
      S acc = S(0);
      for (std::size_t q = 0; q < r; ++q) acc = acc + S(a_o[q]) * z[q * len_out + p];
      out[o * len_out + p] = acc + S(layer.bias[o]);
    }
  }
}

// Rectifier then width-2 max-pool over each channel; returns pooled length.
template <typename S>
std::size_t relu_pool(std::span<S> maps, std::size_t channels, std::size_t length, std::span<S> out) {
  for (auto& v : maps.first(channels * length)) v = maximum(v, S(0));
  const std::size_t pooled = pool_output_length(length);
  for (std::size_t c = 0; c < channels; ++c) {
    const S* src = maps.data() + c * length;
    S* dst = out.data() + c * pooled;
    if (length == 1) {
      dst[0] = src[0];
      continue;
    }
    for (std::size_t i = 0; i < pooled; ++i) dst[i] = maximum(src[2 * i], src[2 * i + 1]);
  }
  return pooled;
}

template <typename S>
void dense_layer(const DenseLayer& layer, std::span<const S> in, std::span<S> out) {
  for (std::size_t o = 0; o < layer.out; ++o) {
    const float* w = layer.weights.data() + o * layer.in;
    S acc = S(0);
    for (std::size_t j = 0; j < layer.in; ++j) acc = acc + S(w[j]) * in[j];
    if (layer.has_bias()) acc = acc + S(layer.bias[o]);
    out[o] = acc;
  }
}

// Unnormalized class scores for one pixel.
template <typename S>
void logits(const SpectralCnn& model, std::span<const S> pixel, std::span<S> scores) {
  std::size_t widest = model.input_length;
  {
    std::size_t len = model.input_length;
    for (const auto& layer : model.conv_stack) {
      const auto shape = conv_shape(layer);
      const std::size_t conv_len = len - shape.kernel + 1;
      widest = std::max(widest, shape.out_channels * conv_len);
      len = pool_output_length(conv_len);
    }
  }
  thread_local std::vector<S> a;
  thread_local std::vector<S> b;
  a.assign(pixel.begin(), pixel.end());
  a.resize(widest, S(0));
  b.assign(widest, S(0));
  std::size_t len = model.input_length;
  for (const auto& layer : model.conv_stack) {
    const auto shape = conv_shape(layer);
    const std::size_t conv_len = len - shape.kernel + 1;
    std::visit([&](const auto& l) { conv_layer<S>(l, std::span<const S>(a), len, std::span<S>(b)); },
               layer);
    len = relu_pool<S>(std::span<S>(b), shape.out_channels, conv_len, std::span<S>(a));
  }
  dense_layer<S>(model.dense, std::span<const S>(a.data(), model.dense.in), scores);
}

}  // namespace specmask::kernels

#endif  // SPECMASK_CNN_KERNELS_HPP_

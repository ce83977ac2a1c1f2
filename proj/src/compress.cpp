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

#include "specmask/compress.hpp"

#include <string>

#include "specmask/errors.hpp"

namespace specmask {

std::size_t factorized_param_count(const ConvShape& shape, std::size_t rank) {
  return rank * (shape.out_channels + shape.in_channels * shape.kernel) + shape.out_channels;
}

std::size_t max_useful_rank(const ConvShape& shape) {
  const std::size_t cols = shape.in_channels * shape.kernel;
  const std::size_t dense = shape.out_channels * cols;
  const std::size_t per_rank = shape.out_channels + cols;
  const std::size_t full = std::min(shape.out_channels, cols);
  // Largest r with r * per_rank < dense.
  const std::size_t r = dense == 0 ? 0 : (dense - 1) / per_rank;
  return std::min(r, full);
}

FactorizedConv1dLayer factorize_conv(const Conv1dLayer& layer, std::size_t rank) {
  const std::size_t cols = layer.in_channels * layer.kernel;
  const std::size_t full = std::min(layer.out_channels, cols);
  if (rank < 1 || rank > full) {
    throw InvalidArgument("factorize_conv: rank " + std::to_string(rank) + " outside [1, " +
                          std::to_string(full) + "]");
  }
  const Matrix w(layer.out_channels, cols, layer.weights);
  const SvdResult svd = truncated_svd(w, rank);

  FactorizedConv1dLayer f;
  f.in_channels = layer.in_channels;
  f.out_channels = layer.out_channels;
  f.kernel = layer.kernel;
  f.rank = rank;
  f.factor_a = Matrix(layer.out_channels, rank);
  f.factor_b = Matrix(rank, cols);
  for (std::size_t q = 0; q < rank; ++q) {
    const double s = svd.singular_values[q];
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      f.factor_a(o, q) = static_cast<float>(s * svd.left_factors(o, q));
    }
    for (std::size_t j = 0; j < cols; ++j) f.factor_b(q, j) = svd.right_factors(j, q);
  }
  f.bias = layer.bias;
  return f;
}

Conv1dLayer to_dense(const FactorizedConv1dLayer& layer) {
  const MatrixD w = matmul(to_double(layer.factor_a), to_double(layer.factor_b));
  Conv1dLayer out = Conv1dLayer::zeros(layer.in_channels, layer.out_channels, layer.kernel);
  for (std::size_t i = 0; i < w.size(); ++i) out.weights[i] = static_cast<float>(w.data()[i]);
  out.bias = layer.bias;
  return out;
}

CompressionResult compress_model(const SpectralCnn& model, std::size_t budget) {
  model.validate();
  const std::size_t n = model.conv_stack.size();

  std::vector<Conv1dLayer> dense(n);
  std::vector<ConvShape> shapes(n);
  std::vector<std::size_t> ranks(n, 0);
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t l = 0; l < n; ++l) {
    const auto& layer = model.conv_stack[l];
    if (const auto* f = std::get_if<FactorizedConv1dLayer>(&layer)) {
      dense[l] = to_dense(*f);
      ranks[l] = f->rank;
    } else {
      dense[l] = std::get<Conv1dLayer>(layer);
    }
    shapes[l] = conv_shape(layer);
    counts[l] = param_count(layer);
  }
  const std::size_t fixed = model.dense.param_count();
  auto total = [&] {
    std::size_t t = fixed;
    for (std::size_t c : counts) t += c;
    return t;
  };

  CompressionResult result;
  result.achievable_minimum = fixed;
  for (std::size_t l = 0; l < n; ++l) {
    const bool reducible = ranks[l] > 0 || max_useful_rank(shapes[l]) > 0;
    result.achievable_minimum +=
        reducible ? std::min(counts[l], factorized_param_count(shapes[l], 1)) : counts[l];
  }

  const std::size_t original_total = total();
  if (budget >= original_total) {
    result.model = model;
    result.ranks = ranks;
    result.total_params = original_total;
    result.budget_met = true;
    return result;
  }

  bool changed = false;
  while (total() > budget) {
    std::size_t pick = n;
    for (std::size_t l = 0; l < n; ++l) {
      const bool can_shrink = ranks[l] > 1 || (ranks[l] == 0 && max_useful_rank(shapes[l]) > 0);
      if (!can_shrink) continue;
      if (pick == n || counts[l] > counts[pick]) pick = l;
    }
    if (pick == n) break;
    ranks[pick] = ranks[pick] == 0 ? max_useful_rank(shapes[pick]) : ranks[pick] - 1;
    counts[pick] = factorized_param_count(shapes[pick], ranks[pick]);
    changed = true;
  }

  result.model = model;
  if (changed) {
    for (std::size_t l = 0; l < n; ++l) {
      if (ranks[l] > 0) result.model.conv_stack[l] = factorize_conv(dense[l], ranks[l]);
    }
  }
  result.ranks = ranks;
  result.total_params = count_params(result.model).total;
  result.budget_met = result.total_params <= budget;
  return result;
}

}  // namespace specmask

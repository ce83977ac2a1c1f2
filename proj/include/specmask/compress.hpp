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

// Low-rank factorization of convolution layers and budget-driven rank
// selection for a whole network.

#ifndef SPECMASK_COMPRESS_HPP_
#define SPECMASK_COMPRESS_HPP_

#include <cstddef>
#include <vector>

#include "specmask/cnn.hpp"

namespace specmask {

// Parameter count of a rank-r factorization of a layer with this shape.
std::size_t factorized_param_count(const ConvShape& shape, std::size_t rank);

// Largest rank whose factorization stores fewer parameters than the dense
// layer; 0 when no rank helps.
std::size_t max_useful_rank(const ConvShape& shape);

// Truncated SVD of the out x (in*kernel) unfolding; singular values are
// absorbed into factor_a, the bias is copied.
FactorizedConv1dLayer factorize_conv(const Conv1dLayer& layer, std::size_t rank);

// factor_a * factor_b folded back into a plain convolution.
Conv1dLayer to_dense(const FactorizedConv1dLayer& layer);

struct CompressionResult {
  SpectralCnn model;
  std::vector<std::size_t> ranks;  // per conv layer; 0 = left dense
  std::size_t total_params = 0;
  // Smallest count reachable by this procedure (every reducible layer at rank 1).
  std::size_t achievable_minimum = 0;
  bool budget_met = false;
};

// Repeatedly lowers the rank of whichever conv layer currently holds the
// most parameters (a dense layer first drops to its largest useful rank)
// until the total fits the budget or no layer can shrink further. Layers
// that factorization cannot shrink stay dense. The result is not fine-tuned.
CompressionResult compress_model(const SpectralCnn& model, std::size_t budget);

}  // namespace specmask

#endif  // SPECMASK_COMPRESS_HPP_

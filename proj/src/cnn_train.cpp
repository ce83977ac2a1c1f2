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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specmask/cnn.hpp"
#include "specmask/errors.hpp"

namespace specmask {

namespace {

// Activations cached for one pixel.
struct LayerCache {
  std::size_t in_len = 0;
  std::size_t conv_len = 0;
  std::size_t pooled_len = 0;
  std::vector<double> input;      // in_channels x in_len
  std::vector<double> pre;        // out_channels x conv_len, before the rectifier
  std::vector<double> hidden;     // rank x conv_len, factorized layers only
  std::vector<std::size_t> argmax;  // out_channels x pooled_len, index into pre
};

// y_p = W * window_p + b, with W either dense or factor_a * factor_b.
void conv_forward_cached(const ConvLayer& layer, LayerCache& c) {
  const auto shape = conv_shape(layer);
  const std::size_t k = shape.kernel;
  c.conv_len = c.in_len - k + 1;
  c.pre.assign(shape.out_channels * c.conv_len, 0.0);
  if (const auto* dense = std::get_if<Conv1dLayer>(&layer)) {
    for (std::size_t o = 0; o < shape.out_channels; ++o) {
      const float* w_o = dense->weights.data() + o * shape.in_channels * k;
      for (std::size_t p = 0; p < c.conv_len; ++p) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < shape.in_channels; ++ch) {
          const double* x = c.input.data() + ch * c.in_len + p;
          const float* w = w_o + ch * k;
          for (std::size_t t = 0; t < k; ++t) acc += w[t] * x[t];
        }
        c.pre[o * c.conv_len + p] = acc + dense->bias[o];
      }
    }
    return;
  }
  const auto& f = std::get<FactorizedConv1dLayer>(layer);
  c.hidden.assign(f.rank * c.conv_len, 0.0);
  for (std::size_t q = 0; q < f.rank; ++q) {
    auto b_q = f.factor_b.row(q);
    for (std::size_t p = 0; p < c.conv_len; ++p) {
      double acc = 0.0;
      for (std::size_t ch = 0; ch < shape.in_channels; ++ch) {
        const double* x = c.input.data() + ch * c.in_len + p;
        for (std::size_t t = 0; t < k; ++t) acc += b_q[ch * k + t] * x[t];
      }
      c.hidden[q * c.conv_len + p] = acc;
    }
  }
  for (std::size_t o = 0; o < shape.out_channels; ++o) {
    auto a_o = f.factor_a.row(o);
    for (std::size_t p = 0; p < c.conv_len; ++p) {
      double acc = 0.0;
      for (std::size_t q = 0; q < f.rank; ++q) acc += a_o[q] * c.hidden[q * c.conv_len + p];
      c.pre[o * c.conv_len + p] = acc + f.bias[o];
    }
  }
}

// Rectifier + pool; writes the next layer's input and records argmax.
void relu_pool_cached(std::size_t channels, LayerCache& c, std::vector<double>& next) {
  c.pooled_len = pool_output_length(c.conv_len);
  next.assign(channels * c.pooled_len, 0.0);
  c.argmax.assign(channels * c.pooled_len, 0);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const std::size_t base = ch * c.conv_len;
    for (std::size_t i = 0; i < c.pooled_len; ++i) {
      std::size_t best = base + (c.conv_len == 1 ? 0 : 2 * i);
      if (c.conv_len > 1 && std::max(c.pre[best + 1], 0.0) > std::max(c.pre[best], 0.0)) ++best;
      c.argmax[ch * c.pooled_len + i] = best;
      next[ch * c.pooled_len + i] = std::max(c.pre[best], 0.0);
    }
  }
}

// d_pre has the shape of pre; accumulates parameter gradients at `grad`
// (laid out as the layer's parameter blocks) and, if d_input is non-null,
// the gradient with respect to the layer input.
void conv_backward(const ConvLayer& layer, const LayerCache& c, const std::vector<double>& d_pre,
                   std::span<double> grad, std::vector<double>* d_input) {
  const auto shape = conv_shape(layer);
  const std::size_t k = shape.kernel;
  const std::size_t window = shape.in_channels * k;
  if (d_input) d_input->assign(shape.in_channels * c.in_len, 0.0);

  if (const auto* dense = std::get_if<Conv1dLayer>(&layer)) {
    double* g_w = grad.data();
    double* g_b = grad.data() + shape.out_channels * window;
    for (std::size_t o = 0; o < shape.out_channels; ++o) {
      const float* w_o = dense->weights.data() + o * window;
      for (std::size_t p = 0; p < c.conv_len; ++p) {
        const double dy = d_pre[o * c.conv_len + p];
        if (dy == 0.0) continue;
        g_b[o] += dy;
        for (std::size_t ch = 0; ch < shape.in_channels; ++ch) {
          const double* x = c.input.data() + ch * c.in_len + p;
          double* gw = g_w + o * window + ch * k;
          for (std::size_t t = 0; t < k; ++t) gw[t] += dy * x[t];
          if (d_input) {
            double* dx = d_input->data() + ch * c.in_len + p;
            const float* w = w_o + ch * k;
            for (std::size_t t = 0; t < k; ++t) dx[t] += dy * w[t];
          }
        }
      }
    }
    return;
  }

  const auto& f = std::get<FactorizedConv1dLayer>(layer);
  const std::size_t r = f.rank;
  double* g_a = grad.data();
  double* g_bf = grad.data() + shape.out_channels * r;
  double* g_bias = g_bf + r * window;
  std::vector<double> d_hidden(r * c.conv_len, 0.0);
  for (std::size_t o = 0; o < shape.out_channels; ++o) {
    auto a_o = f.factor_a.row(o);
    for (std::size_t p = 0; p < c.conv_len; ++p) {
      const double dy = d_pre[o * c.conv_len + p];
      if (dy == 0.0) continue;
      g_bias[o] += dy;
      for (std::size_t q = 0; q < r; ++q) {
        g_a[o * r + q] += dy * c.hidden[q * c.conv_len + p];
        d_hidden[q * c.conv_len + p] += dy * a_o[q];
      }
    }
  }
  for (std::size_t q = 0; q < r; ++q) {
    auto b_q = f.factor_b.row(q);
    for (std::size_t p = 0; p < c.conv_len; ++p) {
      const double dz = d_hidden[q * c.conv_len + p];
      if (dz == 0.0) continue;
      for (std::size_t ch = 0; ch < shape.in_channels; ++ch) {
        const double* x = c.input.data() + ch * c.in_len + p;
        double* gb = g_bf + q * window + ch * k;
        for (std::size_t t = 0; t < k; ++t) gb[t] += dz * x[t];
        if (d_input) {
          double* dx = d_input->data() + ch * c.in_len + p;
          for (std::size_t t = 0; t < k; ++t) dx[t] += dz * b_q[ch * k + t];
        }
      }
    }
  }
}

}  // namespace

double loss_and_gradient(const SpectralCnn& model, std::span<const float> pixel, std::size_t label,
                         std::span<double> grad) {
  if (pixel.size() != model.input_length) {
    throw InvalidArgument("loss_and_gradient: pixel length does not match model input");
  }
  if (label >= model.class_count) throw InvalidArgument("loss_and_gradient: label out of range");
  const std::size_t n_params = count_params(model).trainable;
  if (grad.size() != n_params) {
    throw InvalidArgument("loss_and_gradient: gradient buffer has " + std::to_string(grad.size()) +
                          " entries, model has " + std::to_string(n_params));
  }

  thread_local std::vector<LayerCache> caches;
  caches.resize(model.conv_stack.size());
  std::vector<double> act(pixel.begin(), pixel.end());
  std::size_t len = model.input_length;
  for (std::size_t l = 0; l < model.conv_stack.size(); ++l) {
    LayerCache& c = caches[l];
    c.in_len = len;
    c.input = act;
    conv_forward_cached(model.conv_stack[l], c);
    relu_pool_cached(conv_shape(model.conv_stack[l]).out_channels, c, act);
    len = c.pooled_len;
  }

  const DenseLayer& dense = model.dense;
  std::vector<double> probs(dense.out, 0.0);
  for (std::size_t o = 0; o < dense.out; ++o) {
    double acc = dense.has_bias() ? dense.bias[o] : 0.0;
    for (std::size_t j = 0; j < dense.in; ++j) acc += dense.weights[o * dense.in + j] * act[j];
    probs[o] = acc;
  }
  const double hi = *std::max_element(probs.begin(), probs.end());
  double sum = 0.0;
  for (double& p : probs) {
    p = std::exp(p - hi);
    sum += p;
  }
  for (double& p : probs) p /= sum;
  const double loss = -std::log(std::max(probs[label], 1e-300));

  // Parameter block offsets, in flatten order.
  std::vector<std::size_t> offset(model.conv_stack.size() + 1, 0);
  for (std::size_t l = 0; l < model.conv_stack.size(); ++l) {
    offset[l + 1] = offset[l] + param_count(model.conv_stack[l]);
  }
  double* g_dense = grad.data() + offset.back();

  std::vector<double> d_act(dense.in, 0.0);
  for (std::size_t o = 0; o < dense.out; ++o) {
    const double dz = probs[o] - (o == label ? 1.0 : 0.0);
    for (std::size_t j = 0; j < dense.in; ++j) {
      g_dense[o * dense.in + j] += dz * act[j];
      d_act[j] += dz * dense.weights[o * dense.in + j];
    }
    if (dense.has_bias()) g_dense[dense.out * dense.in + o] += dz;
  }

  std::vector<double> d_pre;
  std::vector<double> d_input;
  for (std::size_t l = model.conv_stack.size(); l-- > 0;) {
    const LayerCache& c = caches[l];
    d_pre.assign(c.pre.size(), 0.0);
    for (std::size_t i = 0; i < c.argmax.size(); ++i) {
      const std::size_t src = c.argmax[i];
      if (c.pre[src] > 0.0) d_pre[src] += d_act[i];
    }
    conv_backward(model.conv_stack[l], c, d_pre,
                  grad.subspan(offset[l], offset[l + 1] - offset[l]), l > 0 ? &d_input : nullptr);
    if (l > 0) d_act.swap(d_input);
  }
  return loss;
}

TrainResult train(SpectralCnn model, const PixelDataset& dataset, const TrainConfig& config) {
  if (config.epochs < 1) throw InvalidArgument("train: epochs must be at least 1");
  if (config.batch < 1) throw InvalidArgument("train: batch must be at least 1");
  if (dataset.feature_count != model.input_length) {
    throw InvalidArgument("train: dataset has " + std::to_string(dataset.feature_count) +
                          " features, model expects " + std::to_string(model.input_length));
  }
  std::vector<std::size_t> rows = dataset.rows_in(Split::kTrain);
  if (rows.empty()) throw InvalidArgument("train: dataset has no train rows");
  model.validate();

  Rng rng(config.seed);
  const std::size_t n_params = count_params(model).trainable;
  std::vector<double> grad(n_params);
  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(rows));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < rows.size(); start += config.batch) {
      const std::size_t stop = std::min(rows.size(), start + config.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t row = rows[i];
        batch_loss += loss_and_gradient(model, dataset.features.row(row), dataset.labels[row], grad);
      }
      const double scale = config.step_size / static_cast<double>(stop - start);
      if (config.step_size != 0.0) {
        std::size_t at = 0;
        for (auto block : parameter_blocks(model)) {
          for (float& w : block) w = static_cast<float>(w - scale * grad[at++]);
        }
      }
      loss_sum += batch_loss / static_cast<double>(stop - start);
      ++batches;
    }
    result.history.train_loss.push_back(loss_sum / static_cast<double>(batches));
    result.history.val_accuracy.push_back(
        dataset.count(Split::kVal) ? accuracy(model, dataset, Split::kVal) : 0.0);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace specmask

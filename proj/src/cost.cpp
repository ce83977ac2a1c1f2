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

#include "specmask/cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <variant>

#include "specmask/errors.hpp"

namespace specmask {

namespace {

void append_cnn_stages(const SpectralCnn& model, std::vector<CostItem>& out) {
  std::size_t len = model.input_length;
  std::size_t index = 0;
  for (const auto& layer : model.conv_stack) {
    const auto shape = conv_shape(layer);
    const std::uint64_t conv_len = len - shape.kernel + 1;
    const std::uint64_t in_k = shape.in_channels * shape.kernel;
    CostItem conv;
    conv.stage = "conv" + std::to_string(++index);
    conv.params = param_count(layer);
    if (const auto* f = std::get_if<FactorizedConv1dLayer>(&layer)) {
      conv.flops = f->rank * conv_len * 2 * in_k + shape.out_channels * conv_len * (2 * f->rank + 1);
      conv.stage += "-factorized";
    } else {
      conv.flops = shape.out_channels * conv_len * (2 * in_k + 1);
    }
    out.push_back(conv);

    const std::uint64_t pooled = pool_output_length(conv_len);
    CostItem act;
    act.stage = "relu-pool" + std::to_string(index);
    act.flops = shape.out_channels * conv_len + (conv_len == 1 ? 0 : shape.out_channels * pooled);
    out.push_back(act);
    len = pooled;
  }
  CostItem dense;
  dense.stage = "dense";
  dense.params = model.dense.weights.size() + model.dense.bias.size();
  dense.flops = model.dense.out * (2 * model.dense.in + (model.dense.has_bias() ? 1 : 0));
  out.push_back(dense);

  CostItem softmax;
  softmax.stage = "softmax";
  softmax.flops = model.class_count;
  out.push_back(softmax);
}

void sum_breakdown(CostReport& r) {
  r.flops_per_pixel = 0;
  r.comparisons_min = 0;
  r.comparisons_max = 0;
  for (const auto& item : r.breakdown) {
    r.flops_per_pixel += item.flops;
    r.comparisons_min += item.comparisons_min;
    r.comparisons_max += item.comparisons_max;
  }
}

std::string fmt_num(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string comparisons_text(const CostReport& r) {
  if (r.comparisons_are_range()) {
    return std::to_string(r.comparisons_min) + "-" + std::to_string(r.comparisons_max);
  }
  return std::to_string(r.comparisons_min);
}

}  // namespace

CostReport cnn_cost(const SpectralCnn& model) {
  model.validate();
  CostReport r;
  r.model = "cnn";
  append_cnn_stages(model, r.breakdown);
  sum_breakdown(r);
  const auto p = count_params(model);
  r.params_trainable = p.trainable;
  r.params_total = p.total;
  r.bytes = p.bytes_at_4b;
  return r;
}

CostReport cnn_cost(const ReducedModel& model) {
  model.projector.validate();
  model.head.validate();
  CostReport r;
  r.model = "reduced-d" + std::to_string(model.projector.components);
  CostItem proj;
  proj.stage = "projection";
  const std::uint64_t d_in = model.projector.input_dim;
  proj.flops = d_in + 2 * d_in * model.projector.components;
  proj.params = d_in * model.projector.components;
  r.breakdown.push_back(proj);
  append_cnn_stages(model.head, r.breakdown);
  sum_breakdown(r);
  const auto p = count_params(model);
  r.params_trainable = p.trainable;
  r.params_total = p.total;
  r.bytes = p.bytes_at_4b;
  return r;
}

std::pair<std::uint64_t, std::uint64_t> path_length_range(const Tree& tree) {
  const auto depths = tree.leaf_depths();
  if (depths.empty()) return {0, 0};
  const auto [lo, hi] = std::minmax_element(depths.begin(), depths.end());
  return {*lo, *hi};
}

CostReport gbt_cost(const BoostedEnsemble& ensemble) {
  CostReport r;
  r.model = std::string("gbt-") + policy_name(ensemble.policy);
  CostItem trees;
  trees.stage = "trees";
  for (const auto& t : ensemble.trees) {
    const auto [lo, hi] = path_length_range(t.tree);
    trees.comparisons_min += lo;
    trees.comparisons_max += hi;
    trees.params += t.tree.node_count();
  }
  trees.flops = ensemble.trees.size();
  r.breakdown.push_back(trees);
  CostItem softmax;
  softmax.stage = "softmax";
  softmax.flops = ensemble.class_count;
  r.breakdown.push_back(softmax);
  sum_breakdown(r);
  const auto stats = tree_stats(ensemble);
  r.params_trainable = stats.nodes;
  r.params_total = stats.nodes;
  r.bytes = stats.bytes_float64;
  return r;
}

HardwareBudget budget_from_config(const ConfigMap& config) {
  HardwareBudget b;
  if (auto name = config_get(config, "budget.name")) b.name = *name;
  const double cache = config_number(config, "budget.cache_bytes", static_cast<double>(b.cache_bytes));
  const double params =
      config_number(config, "budget.max_params_4byte", static_cast<double>(b.max_params_4byte));
  if (!(cache > 0) || !(params > 0) || cache != std::floor(cache) || params != std::floor(params)) {
    throw InvalidData("budget limits must be positive integers");
  }
  b.cache_bytes = static_cast<std::uint64_t>(cache);
  b.max_params_4byte = static_cast<std::uint64_t>(params);
  return b;
}

Feasibility feasibility(const CostReport& report, const HardwareBudget& budget) {
  Feasibility f;
  f.fits_cache = report.bytes <= budget.cache_bytes;
  f.fits_param_limit = report.params_total <= budget.max_params_4byte;
  f.cache_margin_bytes = static_cast<std::int64_t>(budget.cache_bytes) - static_cast<std::int64_t>(report.bytes);
  f.param_margin =
      static_cast<std::int64_t>(budget.max_params_4byte) - static_cast<std::int64_t>(report.params_total);
  return f;
}

std::string format_cost_table(std::span<const CostReport> reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %12s %12s %12s %12s %10s\n", "model", "kFLOPs/px", "COMP/px",
                "trainable", "params", "bytes");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-20s %12s %12s %12llu %12llu %10llu\n", r.model.c_str(),
                  fmt_num(static_cast<double>(r.flops_per_pixel) / 1000.0, "%.2f").c_str(),
                  comparisons_text(r).c_str(), static_cast<unsigned long long>(r.params_trainable),
                  static_cast<unsigned long long>(r.params_total), static_cast<unsigned long long>(r.bytes));
    out += line;
  }
  return out;
}

std::string cost_csv_header() {
  return "model,flops_per_pixel,comparisons_min,comparisons_max,params_trainable,params_total,bytes";
}

std::string format_cost_csv_row(const CostReport& r) {
  return r.model + "," + std::to_string(r.flops_per_pixel) + "," + std::to_string(r.comparisons_min) + "," +
         std::to_string(r.comparisons_max) + "," + std::to_string(r.params_trainable) + "," +
         std::to_string(r.params_total) + "," + std::to_string(r.bytes);
}

}  // namespace specmask

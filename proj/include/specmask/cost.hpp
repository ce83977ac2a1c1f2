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

// Analytic per-pixel inference cost and hardware budget checks.
//
// FLOP convention: a multiply-accumulate is 2 FLOPs; a bias add, a ReLU, a
// pool comparison and a softmax element are 1 each. Projection onto d
// principal components costs D (centering) + 2*D*d. Boosted ensembles cost
// one accumulation per tree plus the softmax, and their comparisons are the
// split tests along the root-to-leaf path of every tree.

#ifndef SPECMASK_COST_HPP_
#define SPECMASK_COST_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specmask/cnn.hpp"
#include "specmask/config.hpp"
#include "specmask/gbt.hpp"
#include "specmask/reduce.hpp"

namespace specmask {

struct CostItem {
  std::string stage;
  std::uint64_t flops = 0;
  std::uint64_t comparisons_min = 0;
  std::uint64_t comparisons_max = 0;
  std::uint64_t params = 0;
};

struct CostReport {
  std::string model;
  std::uint64_t flops_per_pixel = 0;
  std::uint64_t comparisons_min = 0;
  std::uint64_t comparisons_max = 0;
  std::uint64_t params_trainable = 0;
  // For ensembles: one stored value (threshold or leaf) per node.
  std::uint64_t params_total = 0;
  std::uint64_t bytes = 0;
  std::vector<CostItem> breakdown;

  bool comparisons_are_range() const { return comparisons_min != comparisons_max; }
};

CostReport cnn_cost(const SpectralCnn& model);
CostReport cnn_cost(const ReducedModel& model);
CostReport gbt_cost(const BoostedEnsemble& ensemble);

// Root-to-leaf split counts over all leaves of one tree.
std::pair<std::uint64_t, std::uint64_t> path_length_range(const Tree& tree);

struct HardwareBudget {
  std::string name = "zynq-7030";
  std::uint64_t cache_bytes = 32768;
  std::uint64_t max_params_4byte = 8192;
};

// Reads budget.name, budget.cache_bytes and budget.max_params_4byte,
// keeping defaults for missing keys.
HardwareBudget budget_from_config(const ConfigMap& config);

struct Feasibility {
  bool fits_cache = false;
  bool fits_param_limit = false;
  std::int64_t cache_margin_bytes = 0;  // cache_bytes - bytes
  std::int64_t param_margin = 0;        // max_params_4byte - params_total

  bool fits() const { return fits_cache && fits_param_limit; }
};

Feasibility feasibility(const CostReport& report, const HardwareBudget& budget);

std::string format_cost_table(std::span<const CostReport> reports);
std::string cost_csv_header();
std::string format_cost_csv_row(const CostReport& report);

}  // namespace specmask

#endif  // SPECMASK_COST_HPP_

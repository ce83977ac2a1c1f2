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

#include <cmath>

#include "specmask/errors.hpp"
#include "specmask/gbt.hpp"

namespace specmask {

const char* param_name(TunableParam p) {
  switch (p) {
    case TunableParam::kMaxDepth: return "max_depth";
    case TunableParam::kMinChildWeight: return "min_child_weight";
    case TunableParam::kSubsample: return "subsample";
    case TunableParam::kColsample: return "colsample";
    case TunableParam::kLearningRate: return "learning_rate";
    case TunableParam::kNumBoostRound: return "num_boost_round";
    case TunableParam::kNumLeaves: return "num_leaves";
    case TunableParam::kMinDataInLeaf: return "min_data_in_leaf";
  }
  return "?";
}

bool is_integer_param(TunableParam p) {
  switch (p) {
    case TunableParam::kMaxDepth:
    case TunableParam::kNumBoostRound:
    case TunableParam::kNumLeaves:
    case TunableParam::kMinDataInLeaf:
      return true;
    default:
      return false;
  }
}

double get_param(const GrowthParams& params, TunableParam p) {
  switch (p) {
    case TunableParam::kMaxDepth: return static_cast<double>(params.max_depth);
    case TunableParam::kMinChildWeight: return params.min_child_weight;
    case TunableParam::kSubsample: return params.subsample;
    case TunableParam::kColsample: return params.colsample;
    case TunableParam::kLearningRate: return params.learning_rate;
    case TunableParam::kNumBoostRound: return static_cast<double>(params.num_boost_round);
    case TunableParam::kNumLeaves: return static_cast<double>(params.num_leaves);
    case TunableParam::kMinDataInLeaf: return static_cast<double>(params.min_data_in_leaf);
  }
  return 0.0;
}

void set_param(GrowthParams& params, TunableParam p, double value) {
  const auto count = static_cast<std::size_t>(std::llround(value));
  switch (p) {
    case TunableParam::kMaxDepth: params.max_depth = count; break;
    case TunableParam::kMinChildWeight: params.min_child_weight = value; break;
    case TunableParam::kSubsample: params.subsample = value; break;
    case TunableParam::kColsample: params.colsample = value; break;
    case TunableParam::kLearningRate: params.learning_rate = value; break;
    case TunableParam::kNumBoostRound: params.num_boost_round = count; break;
    case TunableParam::kNumLeaves: params.num_leaves = count; break;
    case TunableParam::kMinDataInLeaf: params.min_data_in_leaf = count; break;
  }
}

std::vector<SearchStage> level_policy_stages() {
  return {
      {"depth", {{TunableParam::kMaxDepth, 3, 12}, {TunableParam::kMinChildWeight, 1, 10}}},
      {"sampling", {{TunableParam::kSubsample, 0.5, 1.0}, {TunableParam::kColsample, 0.5, 1.0}}},
      {"rate", {{TunableParam::kLearningRate, 0.01, 0.5}, {TunableParam::kNumBoostRound, 50, 1000}}},
  };
}

std::vector<SearchStage> leaf_policy_stages() {
  return {
      {"leaves",
       {{TunableParam::kNumLeaves, 20, 1000},
        {TunableParam::kMinDataInLeaf, 20, 2000},
        {TunableParam::kNumBoostRound, 50, 200}}},
  };
}

SearchResult staged_search(const PixelDataset& dataset, const GrowthParams& base, GrowthPolicy policy,
                           std::span<const SearchStage> stages, std::size_t trials_per_stage,
                           std::uint64_t seed) {
  if (trials_per_stage == 0) throw InvalidArgument("trials per stage must be positive");
  if (stages.empty()) throw InvalidArgument("at least one search stage is required");
  for (const auto& s : stages) {
    if (s.ranges.empty()) throw InvalidArgument("search stage '" + s.name + "' has no ranges");
    for (const auto& r : s.ranges) {
      if (!(r.lo <= r.hi)) throw InvalidArgument(std::string("empty range for ") + param_name(r.param));
    }
  }
  if (dataset.count(Split::kVal) == 0) throw InvalidArgument("search needs validation rows");

  Rng rng(seed);
  SearchResult result;
  result.best = base;
  for (std::size_t si = 0; si < stages.size(); ++si) {
    bool have = false;
    GrowthParams stage_best = result.best;
    double stage_loss = 0.0;
    for (std::size_t t = 0; t < trials_per_stage; ++t) {
      GrowthParams p = result.best;
      for (const auto& r : stages[si].ranges) {
        double v;
        if (is_integer_param(r.param)) {
          v = static_cast<double>(rng.uniform_int(std::llround(r.lo), std::llround(r.hi)));
        } else {
          v = rng.uniform(r.lo, r.hi);
        }
        set_param(p, r.param, v);
      }
      const auto e = train_boosted(dataset, p, policy);
      const double loss = e.val_loss_history.at(e.best_round - 1);
      result.trials.push_back({si, p, loss});
      if (!have || loss < stage_loss) {
        have = true;
        stage_best = p;
        stage_loss = loss;
      }
    }
    result.best = stage_best;
    result.best_val_loss = stage_loss;
  }
  return result;
}

}  // namespace specmask

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

// Second-order gradient boosting of regression trees on the softmax loss,
// with level-wise (balanced) or leaf-wise (best-first) tree growth.

#ifndef SPECMASK_GBT_HPP_
#define SPECMASK_GBT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specmask/data.hpp"
#include "specmask/numerics.hpp"

namespace specmask {

enum class GrowthPolicy : std::uint8_t { kLevel = 0, kLeaf = 1 };

const char* policy_name(GrowthPolicy policy);
GrowthPolicy parse_policy(const std::string& name);

struct TreeNode {
  bool is_leaf = true;
  std::uint32_t feature = 0;
  float threshold = 0.0f;  // go left iff value < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf contribution before the learning rate
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // Index of the leaf reached by x. Adds one per split visited to *comparisons.
  std::size_t find_leaf(std::span<const float> x, std::size_t* comparisons = nullptr) const;
  double predict(std::span<const float> x) const { return nodes[find_leaf(x)].value; }

  std::size_t node_count() const { return nodes.size(); }
  std::size_t leaf_count() const;
  // Root-to-leaf split counts, one entry per leaf (pre-order).
  std::vector<std::size_t> leaf_depths() const;
  std::size_t depth() const;
};

struct BoostedTree {
  std::uint32_t round = 0;  // 0-based boosting round
  std::uint32_t class_id = 0;
  Tree tree;
};

struct GrowthParams {
  std::size_t max_depth = 6;        // level policy only
  double min_child_weight = 1.0;    // minimum hessian sum per child
  double subsample = 1.0;           // row fraction per round
  double colsample = 1.0;           // feature fraction per tree
  double learning_rate = 0.3;
  std::size_t num_boost_round = 100;
  std::size_t num_leaves = 31;      // leaf policy only
  std::size_t min_data_in_leaf = 1;  // minimum rows per child
  std::size_t early_stop_patience = 5;  // 0 disables early stopping
  std::uint64_t seed = 0;
};

struct BoostedEnsemble {
  std::vector<BoostedTree> trees;
  GrowthPolicy policy = GrowthPolicy::kLevel;
  double learning_rate = 0.3;
  double base_score = 0.0;
  std::size_t class_count = kClassCount;
  std::size_t feature_count = 0;
  GrowthParams params;
  // Filled by training, not serialized.
  std::vector<double> val_loss_history;
  std::size_t best_round = 0;  // 1-based count of kept rounds
};

// Tracks the best validation loss; asks to stop once `patience` rounds in a
// row fail to improve on it.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // round is 1-based. Returns true when training should stop now.
  bool update(std::size_t round, double val_loss);
  std::size_t best_round() const { return best_round_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_round_ = 0;
  double best_loss_ = 0.0;
};

struct SplitChoice {
  bool valid = false;
  std::uint32_t feature = 0;
  float threshold = 0.0f;
  double gain = 0.0;
};

// gain = GL^2/HL + GR^2/HR - G^2/H, each denominator guarded by kHessianEpsilon.
inline constexpr double kHessianEpsilon = 1e-12;
// Gains closer than this (relative to max(1, |incumbent|)) count as ties.
inline constexpr double kGainTieTolerance = 1e-12;
double split_gain(double g_left, double h_left, double g_right, double h_right);
double leaf_weight(double g, double h);

// Records, for every leaf-wise split, the gain chosen and the best gain of
// every leaf that was open at that moment (including the chosen one).
struct GrowthTrace {
  struct Step {
    double chosen_gain = 0.0;
    std::vector<double> open_leaf_gains;
    std::vector<std::vector<std::uint32_t>> open_leaf_rows;
  };
  std::vector<Step> steps;
};

// Grows one tree on the given rows/features of x with exact greedy split
// search over midpoints of sorted unique values. Ties go to the lowest
// feature index, then the lowest threshold.
Tree grow_tree(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
               std::span<const std::uint32_t> rows, std::span<const std::uint32_t> features,
               const GrowthParams& params, GrowthPolicy policy, GrowthTrace* trace = nullptr);

// Best split for a single node, by the same search grow_tree uses.
SplitChoice best_split(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
                       std::span<const std::uint32_t> rows, std::span<const std::uint32_t> features,
                       const GrowthParams& params);

BoostedEnsemble train_boosted(const PixelDataset& dataset, const GrowthParams& params,
                              GrowthPolicy policy);

std::vector<double> predict(const BoostedEnsemble& ensemble, std::span<const float> features);
std::size_t predict_class(const BoostedEnsemble& ensemble, std::span<const float> features);
void predict_batch(const BoostedEnsemble& ensemble, const Matrix& rows, MatrixD& probs);
double accuracy(const BoostedEnsemble& ensemble, const PixelDataset& dataset, Split split);
// Mean softmax cross-entropy over the rows tagged `split`.
double softmax_loss(const BoostedEnsemble& ensemble, const PixelDataset& dataset, Split split);

// Float64 fields per stored node in the size estimate.
inline constexpr std::size_t kValuesPerNode = 8;

struct TreeStats {
  std::size_t trees = 0;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::size_t max_depth = 0;
  double mean_depth = 0.0;
  std::size_t bytes_float64 = 0;  // nodes * kValuesPerNode * 8
};

TreeStats tree_stats(const BoostedEnsemble& ensemble);

std::vector<std::uint8_t> encode_ensemble(const BoostedEnsemble& ensemble);
BoostedEnsemble decode_ensemble(std::span<const std::uint8_t> bytes);
void write_ensemble(const BoostedEnsemble& ensemble, const std::filesystem::path& path);
BoostedEnsemble read_ensemble(const std::filesystem::path& path);

enum class TunableParam {
  kMaxDepth,
  kMinChildWeight,
  kSubsample,
  kColsample,
  kLearningRate,
  kNumBoostRound,
  kNumLeaves,
  kMinDataInLeaf,
};

const char* param_name(TunableParam p);
bool is_integer_param(TunableParam p);

struct ParamRange {
  TunableParam param;
  double lo;
  double hi;  // inclusive for integer parameters
};

struct SearchStage {
  std::string name;
  std::vector<ParamRange> ranges;
};

// Three stages over depth/child weight, row/column sampling, then learning
// rate/rounds.
std::vector<SearchStage> level_policy_stages();
// One stage over leaves, rows per leaf and rounds.
std::vector<SearchStage> leaf_policy_stages();

struct SearchTrial {
  std::size_t stage = 0;
  GrowthParams params;
  double val_loss = 0.0;
};

struct SearchResult {
  GrowthParams best;
  double best_val_loss = 0.0;
  std::vector<SearchTrial> trials;
};

double get_param(const GrowthParams& params, TunableParam p);
void set_param(GrowthParams& params, TunableParam p, double value);

// Stage by stage, samples only that stage's parameters uniformly from their
// ranges (earlier winners frozen), trains, and keeps the lowest best-round
// validation loss. The first trial wins ties.
SearchResult staged_search(const PixelDataset& dataset, const GrowthParams& base, GrowthPolicy policy,
                           std::span<const SearchStage> stages, std::size_t trials_per_stage,
                           std::uint64_t seed);

}  // namespace specmask

#endif  // SPECMASK_GBT_HPP_

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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "specmask/gbt.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace specmask {
namespace {

using oracle::OracleSplit;
using oracle::oracle_split;

// Level-wise tree built by recursing the oracle; checks `tree` node by node.
void expect_matches_oracle(const Tree& tree, std::size_t node, const Matrix& x, const std::vector<double>& g,
                           const std::vector<double>& h, const std::vector<std::uint32_t>& rows,
                           const GrowthParams& p, std::size_t depth) {
  const auto& n = tree.nodes[node];
  const OracleSplit s = depth < p.max_depth ? oracle_split(x, g, h, rows, p) : OracleSplit{};
  ASSERT_EQ(!n.is_leaf, s.valid) << "node " << node << " depth " << depth;
  if (!s.valid) {
    double gs = 0, hs = 0;
    for (auto r : rows) {
      gs += g[r];
      hs += h[r];
    }
    EXPECT_NEAR(n.value, -gs / (hs + kHessianEpsilon), 1e-9 * std::max(1.0, std::abs(n.value)));
    return;
  }
  EXPECT_EQ(n.feature, s.feature);
  EXPECT_EQ(n.threshold, s.threshold);
  std::vector<std::uint32_t> left, right;
  for (auto r : rows) (x(r, s.feature) < s.threshold ? left : right).push_back(r);
  expect_matches_oracle(tree, static_cast<std::size_t>(n.left), x, g, h, left, p, depth + 1);
  expect_matches_oracle(tree, static_cast<std::size_t>(n.right), x, g, h, right, p, depth + 1);
}

struct RandomProblem {
  Matrix x;
  std::vector<double> g, h;
  std::vector<std::uint32_t> rows;
  std::vector<std::uint32_t> features;
  GrowthParams params;
};

RandomProblem random_problem(std::uint64_t seed) {
  Rng rng(seed);
  RandomProblem pr;
  const auto n = static_cast<std::size_t>(rng.uniform_int(2, 200));
  const auto d = static_cast<std::size_t>(rng.uniform_int(1, 5));
  pr.x = Matrix(n, d);
  // Coarse grids on some features force duplicate values.
  for (std::size_t j = 0; j < d; ++j) {
    const bool coarse = rng.uniform() < 0.4;
    for (std::size_t i = 0; i < n; ++i) {
      pr.x(i, j) = coarse ? static_cast<float>(rng.uniform_int(0, 6)) : static_cast<float>(rng.normal());
    }
  }
  const bool softmax_like = seed % 2 == 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (softmax_like) {
      // first-round gradients: p = 1/3, label from a feature threshold
      const bool pos = pr.x(i, 0) > 0.0f;
      pr.g.push_back(1.0 / 3.0 - (pos ? 1.0 : 0.0));
      pr.h.push_back(2.0 / 9.0);
    } else {
      const double p = rng.uniform(0.01, 0.99);
      pr.g.push_back(p - (rng.uniform() < 0.5 ? 1.0 : 0.0));
      pr.h.push_back(p * (1 - p));
    }
  }
  pr.rows.resize(n);
  std::iota(pr.rows.begin(), pr.rows.end(), 0u);
  pr.features.resize(d);
  std::iota(pr.features.begin(), pr.features.end(), 0u);
  pr.params.max_depth = static_cast<std::size_t>(rng.uniform_int(1, 4));
  pr.params.min_child_weight = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0);
  pr.params.min_data_in_leaf = static_cast<std::size_t>(rng.uniform_int(1, 5));
  return pr;
}

TEST(SplitOracle, BestSplitMatchesExhaustiveEnumeration) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const auto pr = random_problem(seed);
    const SplitChoice s = best_split(pr.x, pr.g, pr.h, pr.rows, pr.features, pr.params);
    const OracleSplit o = oracle_split(pr.x, pr.g, pr.h, pr.rows, pr.params);
    ASSERT_EQ(s.valid, o.valid) << "seed " << seed;
    if (!o.valid) continue;
    EXPECT_EQ(s.feature, o.feature) << "seed " << seed;
    EXPECT_EQ(s.threshold, o.threshold) << "seed " << seed;
    EXPECT_NEAR(s.gain, o.gain, 1e-9 * std::max(1.0, o.gain)) << "seed " << seed;
  }
}

TEST(SplitOracle, LevelTreeMatchesRecursiveOracle) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const auto pr = random_problem(seed);
    const Tree t = grow_tree(pr.x, pr.g, pr.h, pr.rows, pr.features, pr.params, GrowthPolicy::kLevel);
    expect_matches_oracle(t, 0, pr.x, pr.g, pr.h, pr.rows, pr.params, 0);
    EXPECT_LE(t.leaf_count(), std::size_t{1} << pr.params.max_depth);
    EXPECT_LE(t.depth(), pr.params.max_depth);
  }
}

TEST(SplitOracle, FirstBoostedTreesMatchOracle) {
  // Two-feature separable toy set, labels from which side of two cut lines a point falls.
  Rng rng(5);
  PixelDataset ds;
  ds.feature_count = 2;
  ds.features = Matrix(120, 2);
  for (std::size_t i = 0; i < 120; ++i) {
    const float a = static_cast<float>(rng.uniform(0, 3));
    const float b = static_cast<float>(rng.uniform(0, 1));
    ds.features(i, 0) = a;
    ds.features(i, 1) = b;
    ds.labels.push_back(a < 1 ? 0 : (a < 2 ? 1 : 2));
    ds.split.push_back(Split::kTrain);
  }
  GrowthParams p;
  p.max_depth = 2;
  p.min_child_weight = 0.0;
  p.num_boost_round = 1;
  p.learning_rate = 0.3;
  const auto e = train_boosted(ds, p, GrowthPolicy::kLevel);
  ASSERT_EQ(e.trees.size(), 3u);
  std::vector<std::uint32_t> rows(120);
  std::iota(rows.begin(), rows.end(), 0u);
  for (std::uint32_t c = 0; c < 3; ++c) {
    std::vector<double> g(120), h(120, 2.0 / 9.0);
    for (std::size_t i = 0; i < 120; ++i) g[i] = 1.0 / 3.0 - (ds.labels[i] == c ? 1.0 : 0.0);
    expect_matches_oracle(e.trees[c].tree, 0, ds.features, g, h, rows, p, 0);
  }
  // more rounds of depth-2 trees separate the set completely
  p.num_boost_round = 20;
  EXPECT_EQ(accuracy(train_boosted(ds, p, GrowthPolicy::kLevel), ds, Split::kTrain), 1.0);
}

TEST(LeafGrowth, EverySplitHasTheLargestGainAmongOpenLeaves) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto pr = random_problem(seed);
    pr.params.num_leaves = 2 + seed % 12;
    GrowthTrace trace;
    const Tree t = grow_tree(pr.x, pr.g, pr.h, pr.rows, pr.features, pr.params, GrowthPolicy::kLeaf, &trace);
    EXPECT_LE(t.leaf_count(), pr.params.num_leaves);
    EXPECT_EQ(trace.steps.size() + 1, t.leaf_count());
    for (const auto& step : trace.steps) {
      for (std::size_t i = 0; i < step.open_leaf_rows.size(); ++i) {
        const auto s = best_split(pr.x, pr.g, pr.h, step.open_leaf_rows[i], pr.features, pr.params);
        const double recomputed = s.valid ? s.gain : 0.0;
        EXPECT_NEAR(recomputed, step.open_leaf_gains[i], 1e-9 * std::max(1.0, recomputed));
        EXPECT_GE(step.chosen_gain + 1e-9 * std::max(1.0, recomputed), recomputed);
      }
    }
  }
}

TEST(LeafGrowth, IgnoresDepthLimit) {
  // A staircase target forces a deep chain of splits.
  const std::size_t n = 64;
  Matrix x(n, 1);
  std::vector<double> g(n), h(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = static_cast<float>(i);
    g[i] = i < 32 ? -std::pow(2.0, double(i) / 4) : 1.0;
  }
  std::vector<std::uint32_t> rows(n), feats{0};
  std::iota(rows.begin(), rows.end(), 0u);
  GrowthParams p;
  p.max_depth = 1;
  p.min_child_weight = 0;
  p.num_leaves = 12;
  const Tree t = grow_tree(x, g, h, rows, feats, p, GrowthPolicy::kLeaf);
  EXPECT_EQ(t.leaf_count(), 12u);
  EXPECT_GT(t.depth(), 1u);
}

// ---- boosting ---------------------------------------------------------------

class Boosting : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new PixelDataset(testing::separable_dataset(2, 1, 1, 24, 0.5)); }
  static void TearDownTestSuite() { delete data_; }
  static PixelDataset* data_;
};
PixelDataset* Boosting::data_ = nullptr;

TEST_F(Boosting, TreesPerRoundEqualsClassCount) {
  GrowthParams p;
  p.max_depth = 3;
  p.num_boost_round = 4;
  p.early_stop_patience = 0;
  const auto e = train_boosted(*data_, p, GrowthPolicy::kLevel);
  ASSERT_EQ(e.trees.size(), 12u);
  for (std::size_t i = 0; i < e.trees.size(); ++i) {
    EXPECT_EQ(e.trees[i].round, i / 3);
    EXPECT_EQ(e.trees[i].class_id, i % 3);
  }
}

TEST_F(Boosting, TrainingLossNeverIncreases) {
  GrowthParams p;
  p.max_depth = 3;
  p.learning_rate = 0.3;
  p.num_boost_round = 12;
  p.early_stop_patience = 0;
  const auto full = train_boosted(*data_, p, GrowthPolicy::kLevel);
  BoostedEnsemble partial = full;
  double prev = INFINITY;
  for (std::size_t r = 0; r <= 12; ++r) {
    partial.trees.assign(full.trees.begin(), full.trees.begin() + static_cast<std::ptrdiff_t>(r * 3));
    const double loss = softmax_loss(partial, *data_, Split::kTrain);
    EXPECT_LE(loss, prev + 1e-12) << "round " << r;
    prev = loss;
  }
}

TEST_F(Boosting, FullSamplingIgnoresSeed) {
  GrowthParams p;
  p.max_depth = 3;
  p.num_boost_round = 3;
  p.seed = 1;
  const auto a = train_boosted(*data_, p, GrowthPolicy::kLeaf);
  p.seed = 99;
  const auto b = train_boosted(*data_, p, GrowthPolicy::kLeaf);
  EXPECT_EQ(encode_ensemble(a), encode_ensemble(b));
}

TEST_F(Boosting, SubsamplingIsDeterministicPerSeed) {
  GrowthParams p;
  p.max_depth = 3;
  p.num_boost_round = 3;
  p.subsample = 0.6;
  p.colsample = 0.5;
  p.seed = 4;
  const auto a = train_boosted(*data_, p, GrowthPolicy::kLevel);
  const auto b = train_boosted(*data_, p, GrowthPolicy::kLevel);
  EXPECT_EQ(encode_ensemble(a), encode_ensemble(b));
  p.seed = 5;
  EXPECT_NE(encode_ensemble(train_boosted(*data_, p, GrowthPolicy::kLevel)), encode_ensemble(a));
}

TEST_F(Boosting, PolicyLimitsHold) {
  GrowthParams p;
  p.max_depth = 2;
  p.num_leaves = 5;
  p.min_child_weight = 0.0;
  p.num_boost_round = 5;
  for (const auto& t : train_boosted(*data_, p, GrowthPolicy::kLevel).trees) {
    EXPECT_LE(t.tree.leaf_count(), 4u);
    EXPECT_LE(t.tree.node_count(), 7u);
  }
  for (const auto& t : train_boosted(*data_, p, GrowthPolicy::kLeaf).trees) EXPECT_LE(t.tree.leaf_count(), 5u);
}

TEST_F(Boosting, BatchEqualsPerRow) {
  GrowthParams p;
  p.num_boost_round = 5;
  const auto e = train_boosted(*data_, p, GrowthPolicy::kLeaf);
  MatrixD probs;
  predict_batch(e, data_->features, probs);
  for (std::size_t i = 0; i < data_->size(); i += 7) {
    const auto single = predict(e, data_->features.row(i));
    for (int k = 0; k < 3; ++k) EXPECT_EQ(probs(i, k), single[k]);
  }
}

TEST(BoostingBasics, PureSingleClassData) {
  PixelDataset ds;
  ds.feature_count = 2;
  ds.features = testing::random_matrix(30, 2, 3);
  ds.labels.assign(30, 2);
  ds.split.assign(30, Split::kTrain);
  GrowthParams p;
  p.num_boost_round = 1;
  p.learning_rate = 1.0;
  const auto e = train_boosted(ds, p, GrowthPolicy::kLevel);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_GE(predict(e, ds.features.row(i))[2], 0.9);
}

TEST(BoostingBasics, EmptyTrainSplitThrows) {
  PixelDataset ds;
  ds.feature_count = 1;
  ds.features = Matrix(2, 1);
  ds.labels = {0, 1};
  ds.split = {Split::kVal, Split::kTest};
  EXPECT_THROW(train_boosted(ds, GrowthParams{}, GrowthPolicy::kLevel), InvalidArgument);
}

TEST(BoostingBasics, EmptyEnsembleIsUniform) {
  BoostedEnsemble e;
  e.feature_count = 3;
  for (double v : predict(e, std::vector<float>{1, 2, 3})) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(predict(e, std::vector<float>{1, 2}), InvalidArgument);
}

Tree stump(std::uint32_t feature, float threshold, double left, double right) {
  Tree t;
  t.nodes.push_back({false, feature, threshold, 1, 2, 0.0});
  t.nodes.push_back({true, 0, 0, -1, -1, left});
  t.nodes.push_back({true, 0, 0, -1, -1, right});
  return t;
}

TEST(BoostingBasics, HandBuiltStumpsMatchHandSoftmax) {
  BoostedEnsemble e;
  e.feature_count = 2;
  e.learning_rate = 0.5;
  e.trees.push_back({0, 0, stump(0, 1.0f, 2.0, -1.0)});
  e.trees.push_back({0, 1, stump(1, 0.0f, 0.5, 1.5)});
  e.trees.push_back({0, 2, stump(0, 3.0f, -2.0, 4.0)});
  // x = (2, -1): class 0 right (-1), class 1 left (0.5), class 2 left (-2)
  const double s[] = {0.5 * -1.0, 0.5 * 0.5, 0.5 * -2.0};
  const double z = std::exp(s[0]) + std::exp(s[1]) + std::exp(s[2]);
  const auto p = predict(e, std::vector<float>{2.0f, -1.0f});
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p[k], std::exp(s[k]) / z, 1e-6);
  // strict less-than: a value equal to the threshold goes right
  std::size_t cmp = 0;
  EXPECT_EQ(e.trees[0].tree.find_leaf(std::vector<float>{1.0f, 0.0f}, &cmp), 2u);
  EXPECT_EQ(cmp, 1u);
}

// ---- early stopping ---------------------------------------------------------

TEST(EarlyStoppingRule, PlateauAtRound22StopsAt27) {
  EarlyStopping s(5);
  std::size_t stopped = 0;
  for (std::size_t round = 1; round <= 695; ++round) {
    const double loss = round <= 22 ? 1.0 / double(round) : 1.0 / 22.0 + 1e-3 * double(round - 22);
    if (s.update(round, loss)) {
      stopped = round;
      break;
    }
  }
  EXPECT_EQ(stopped, 27u);
  EXPECT_EQ(s.best_round(), 22u);
  EXPECT_EQ(s.best_round() * kClassCount, 66u);
}

TEST(EarlyStoppingRule, EqualLossIsNotAnImprovement) {
  EarlyStopping s(2);
  EXPECT_FALSE(s.update(1, 0.5));
  EXPECT_FALSE(s.update(2, 0.5));
  EXPECT_TRUE(s.update(3, 0.5));
  EXPECT_EQ(s.best_round(), 1u);
}

TEST(EarlyStoppingRule, ZeroPatienceNeverStops) {
  EarlyStopping s(0);
  for (std::size_t r = 1; r < 50; ++r) EXPECT_FALSE(s.update(r, double(r)));
}

// Train rows are clean; a share of the validation labels is flipped, so the
// validation loss falls, bottoms out and then rises.
PixelDataset noisy_validation_set(std::uint64_t seed) {
  Rng rng(seed);
  PixelDataset ds;
  ds.feature_count = 2;
  const std::size_t n_train = 240, n_val = 240;
  ds.features = Matrix(n_train + n_val, 2);
  for (std::size_t i = 0; i < n_train + n_val; ++i) {
    const float a = static_cast<float>(rng.uniform(0, 3));
    ds.features(i, 0) = a;
    ds.features(i, 1) = static_cast<float>(rng.uniform(0, 1));
    auto label = static_cast<std::uint8_t>(a < 1 ? 0 : (a < 2 ? 1 : 2));
    const bool val = i >= n_train;
    if (val && rng.uniform() < 0.25) label = static_cast<std::uint8_t>((label + 1) % 3);
    ds.labels.push_back(label);
    ds.split.push_back(val ? Split::kVal : Split::kTrain);
  }
  return ds;
}

TEST(EarlyStoppingTraining, ValidationPlateauAtRound22Gives66Trees) {
  const PixelDataset ds = noisy_validation_set(3);
  GrowthParams p;
  p.max_depth = 5;
  p.num_boost_round = 695;
  p.early_stop_patience = 5;
  p.min_child_weight = 0.0;
  bool found = false;
  for (int step = 1; step <= 400 && !found; ++step) {
    p.learning_rate = 0.002 * step;
    const auto e = train_boosted(ds, p, GrowthPolicy::kLevel);
    if (e.best_round != 22) continue;
    found = true;
    EXPECT_EQ(e.trees.size(), 66u);
    ASSERT_EQ(e.val_loss_history.size(), 27u);
    for (std::size_t r = 0; r < 27; ++r) {
      if (r != 21) EXPECT_GT(e.val_loss_history[r], e.val_loss_history[21]) << "round " << r + 1;
    }
    EXPECT_NEAR(softmax_loss(e, ds, Split::kVal), e.val_loss_history[21], 1e-12);
  }
  EXPECT_TRUE(found) << "no learning rate produced a round-22 minimum";
}

// ---- stats, serialization, search ------------------------------------------

Tree full_tree(std::size_t depth) {
  Tree t;
  t.nodes.resize((std::size_t{2} << depth) - 1);
  const std::size_t internal = (std::size_t{1} << depth) - 1;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    auto& n = t.nodes[i];
    if (i < internal) {
      n.is_leaf = false;
      n.feature = static_cast<std::uint32_t>(i % 3);
      n.threshold = 0.1f * static_cast<float>(i % 7) - 0.3f;
      n.left = static_cast<std::int32_t>(2 * i + 1);
      n.right = static_cast<std::int32_t>(2 * i + 2);
    } else {
      n.value = 0.01 * static_cast<double>(i);
    }
  }
  return t;
}

TEST(TreeStatsTest, FullDepthFiveTree) {
  BoostedEnsemble e;
  e.feature_count = 3;
  e.trees.push_back({0, 0, full_tree(5)});
  const auto s = tree_stats(e);
  EXPECT_EQ(s.nodes, 63u);
  EXPECT_EQ(s.leaves, 32u);
  EXPECT_EQ(s.max_depth, 5u);
  EXPECT_EQ(s.bytes_float64, 63u * kValuesPerNode * 8);
}

TEST(TreeStatsTest, SixtySixFullTrees) {
  BoostedEnsemble e;
  e.feature_count = 3;
  for (std::uint32_t i = 0; i < 66; ++i) e.trees.push_back({i / 3, i % 3, full_tree(5)});
  const auto s = tree_stats(e);
  EXPECT_EQ(s.trees, 66u);
  EXPECT_EQ(s.nodes, 4158u);
  EXPECT_LE(std::abs(double(s.nodes) - 4104.0) / 4104.0, 0.015);
  EXPECT_DOUBLE_EQ(s.mean_depth, 5.0);
}

TEST(TreeStatsTest, LeafPolicyRespectsNumLeaves) {
  const PixelDataset ds = testing::separable_dataset(2, 1, 1, 24, 0.5);
  GrowthParams p;
  p.num_leaves = 28;
  p.min_child_weight = 0.0;
  p.num_boost_round = 3;
  const auto e = train_boosted(ds, p, GrowthPolicy::kLeaf);
  for (const auto& t : e.trees) EXPECT_LE(t.tree.leaf_count(), 28u);
}

TEST(EnsembleIo, RoundTripPreservesPredictions) {
  BoostedEnsemble e;
  e.feature_count = 3;
  e.policy = GrowthPolicy::kLeaf;
  e.learning_rate = 0.2;
  e.base_score = 0.1;
  for (std::uint32_t i = 0; i < 6; ++i) e.trees.push_back({i / 3, i % 3, full_tree(1 + i % 3)});
  e.trees.push_back({2, 0, stump(2, 0.5f, 1.0, -1.0)});
  const auto back = decode_ensemble(encode_ensemble(e));
  EXPECT_EQ(back.policy, e.policy);
  EXPECT_EQ(back.learning_rate, e.learning_rate);
  EXPECT_EQ(back.base_score, e.base_score);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<float> x = {float(rng.normal()), float(rng.normal()), float(rng.normal())};
    EXPECT_EQ(predict(back, x), predict(e, x));
  }
  EXPECT_EQ(encode_ensemble(back), encode_ensemble(e));
}

TEST(EnsembleIo, CorruptFilesAreFormatErrors) {
  BoostedEnsemble e;
  e.feature_count = 3;
  e.trees.push_back({0, 0, full_tree(2)});
  const auto bytes = encode_ensemble(e);
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(decode_ensemble(std::span(bytes.data(), n)), FormatError) << "length " << n;
  }
  auto bad = bytes;
  bad[4] = 7;  // policy
  EXPECT_THROW(decode_ensemble(bad), FormatError);
}

TEST(StagedSearch, WinnersStayInsideRanges) {
  const PixelDataset ds = testing::separable_dataset(2, 1, 1, 12, 0.5);
  GrowthParams base;
  base.num_boost_round = 3;
  std::vector<SearchStage> stages = {level_policy_stages()[0]};
  const auto r = staged_search(ds, base, GrowthPolicy::kLevel, stages, 3, 7);
  EXPECT_GE(r.best.max_depth, 3u);
  EXPECT_LE(r.best.max_depth, 12u);
  EXPECT_GE(r.best.min_child_weight, 1.0);
  EXPECT_LE(r.best.min_child_weight, 10.0);
  EXPECT_EQ(r.trials.size(), 3u);
}

TEST(StagedSearch, SinglePointRangesReturnThePoint) {
  const PixelDataset ds = testing::separable_dataset(2, 1, 1, 12, 0.5);
  std::vector<SearchStage> stages = {
      {"a", {{TunableParam::kMaxDepth, 4, 4}, {TunableParam::kSubsample, 0.8, 0.8}}},
      {"b", {{TunableParam::kLearningRate, 0.2, 0.2}, {TunableParam::kNumBoostRound, 5, 5}}}};
  const auto r = staged_search(ds, GrowthParams{}, GrowthPolicy::kLevel, stages, 2, 1);
  EXPECT_EQ(r.best.max_depth, 4u);
  EXPECT_EQ(r.best.subsample, 0.8);
  EXPECT_EQ(r.best.learning_rate, 0.2);
  EXPECT_EQ(r.best.num_boost_round, 5u);
}

TEST(StagedSearch, TwoTrialWinnerMatchesDirectTraining) {
  const PixelDataset ds = testing::separable_dataset(2, 1, 1, 12, 0.5);
  GrowthParams base;
  base.num_boost_round = 4;
  std::vector<SearchStage> stages = {{"rate", {{TunableParam::kLearningRate, 0.01, 0.5}}}};
  const auto r = staged_search(ds, base, GrowthPolicy::kLeaf, stages, 2, 11);
  const auto again = staged_search(ds, base, GrowthPolicy::kLeaf, stages, 2, 11);
  EXPECT_EQ(r.best.learning_rate, again.best.learning_rate);
  ASSERT_EQ(r.trials.size(), 2u);
  double losses[2];
  for (int i = 0; i < 2; ++i) {
    const auto e = train_boosted(ds, r.trials[i].params, GrowthPolicy::kLeaf);
    losses[i] = softmax_loss(e, ds, Split::kVal);
    EXPECT_NEAR(losses[i], r.trials[i].val_loss, 1e-12);
  }
  const int winner = losses[1] < losses[0] ? 1 : 0;
  EXPECT_EQ(r.best.learning_rate, r.trials[winner].params.learning_rate);
}

TEST(StagedSearch, ZeroTrialsThrows) {
  const PixelDataset ds = testing::separable_dataset(2, 1, 1, 8);
  EXPECT_THROW(staged_search(ds, GrowthParams{}, GrowthPolicy::kLevel, level_policy_stages(), 0, 1),
               InvalidArgument);
}

}  // namespace
}  // namespace specmask

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

#include "specmask/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "specmask/binary_io.hpp"
#include "specmask/errors.hpp"

namespace specmask {

namespace {

constexpr double kMinSplitGain = 1e-12;
bool beats(double gain, double incumbent) {
  return gain > incumbent + kGainTieTolerance * std::max(1.0, std::abs(incumbent));
}
constexpr double kProbFloor = 1e-15;

using RowList = std::vector<std::uint32_t>;

struct OpenNode {
  std::int32_t node = 0;
  std::size_t depth = 0;
  std::vector<RowList> lists;  // one per candidate feature, sorted by value
  double g = 0.0;
  double h = 0.0;
  SplitChoice best;
};

class Grower {
 public:
  Grower(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
         std::span<const std::uint32_t> features, const GrowthParams& params)
      : x_(x), grad_(grad), hess_(hess), features_(features), params_(params),
        goes_left_(x.rows(), 0) {}

  void sums(OpenNode& n) const {
    n.g = 0.0;
    n.h = 0.0;
    if (n.lists.empty()) return;
    for (auto r : n.lists[0]) {
      n.g += grad_[r];
      n.h += hess_[r];
    }
  }

  SplitChoice find(const OpenNode& n) const {
    SplitChoice best;
    if (n.lists.empty()) return best;
    const std::size_t count = n.lists[0].size();
    const double parent = n.g * n.g / (n.h + kHessianEpsilon);
    for (std::size_t fi = 0; fi < features_.size(); ++fi) {
      const std::uint32_t f = features_[fi];
      const RowList& list = n.lists[fi];
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        gl += grad_[list[i]];
        hl += hess_[list[i]];
        const float a = x_(list[i], f);
        const float b = x_(list[i + 1], f);
        if (!(a < b)) continue;
        const std::size_t nl = i + 1;
        if (nl < params_.min_data_in_leaf || count - nl < params_.min_data_in_leaf) continue;
        const double hr = n.h - hl;
        if (hl < params_.min_child_weight || hr < params_.min_child_weight) continue;
        const double gr = n.g - gl;
        const double gain =
            gl * gl / (hl + kHessianEpsilon) + gr * gr / (hr + kHessianEpsilon) - parent;
        if (gain > kMinSplitGain && (!best.valid || beats(gain, best.gain))) {
          best.valid = true;
          best.gain = gain;
          best.feature = f;
          float t = static_cast<float>(0.5 * (static_cast<double>(a) + static_cast<double>(b)));
          if (!(a < t) || !(t <= b)) t = b;
          best.threshold = t;
        }
      }
    }
    return best;
  }

  void split(OpenNode& parent, OpenNode& left, OpenNode& right) {
    const auto f = parent.best.feature;
    const float t = parent.best.threshold;
    for (auto r : parent.lists[0]) goes_left_[r] = x_(r, f) < t ? 1 : 0;
    left.lists.resize(parent.lists.size());
    right.lists.resize(parent.lists.size());
    for (std::size_t fi = 0; fi < parent.lists.size(); ++fi) {
      for (auto r : parent.lists[fi]) (goes_left_[r] ? left.lists[fi] : right.lists[fi]).push_back(r);
      RowList().swap(parent.lists[fi]);
    }
    left.depth = right.depth = parent.depth + 1;
    sums(left);
    sums(right);
  }

 private:
  const Matrix& x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::span<const std::uint32_t> features_;
  const GrowthParams& params_;
  std::vector<std::uint8_t> goes_left_;
};

void check_inputs(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
                  std::span<const std::uint32_t> rows, std::span<const std::uint32_t> features) {
  if (grad.size() != x.rows() || hess.size() != x.rows()) {
    throw InvalidArgument("gradient/hessian length must equal the row count");
  }
  for (auto r : rows) {
    if (r >= x.rows()) throw InvalidArgument("row index out of range");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i] >= x.cols()) throw InvalidArgument("feature index out of range");
    if (i > 0 && features[i] <= features[i - 1]) {
      throw InvalidArgument("feature indices must be strictly increasing");
    }
  }
}

std::vector<RowList> sorted_lists(const Matrix& x, std::span<const std::uint32_t> rows,
                                  std::span<const std::uint32_t> features) {
  std::vector<RowList> lists(features.size(), RowList(rows.begin(), rows.end()));
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const auto f = features[fi];
    std::sort(lists[fi].begin(), lists[fi].end(), [&](std::uint32_t a, std::uint32_t b) {
      const float va = x(a, f), vb = x(b, f);
      return va < vb || (va == vb && a < b);
    });
  }
  return lists;
}

std::int32_t add_node(Tree& tree) {
  tree.nodes.emplace_back();
  return static_cast<std::int32_t>(tree.nodes.size() - 1);
}

void make_leaf(Tree& tree, const OpenNode& n) {
  auto& node = tree.nodes[static_cast<std::size_t>(n.node)];
  node.is_leaf = true;
  node.value = leaf_weight(n.g, n.h);
}

void make_split(Tree& tree, OpenNode& n, Grower& grower, OpenNode& left, OpenNode& right) {
  grower.split(n, left, right);
  left.node = add_node(tree);
  right.node = add_node(tree);
  auto& node = tree.nodes[static_cast<std::size_t>(n.node)];
  node.is_leaf = false;
  node.feature = n.best.feature;
  node.threshold = n.best.threshold;
  node.left = left.node;
  node.right = right.node;
}

Tree grow_from_lists(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
                     std::vector<RowList> root_lists, std::span<const std::uint32_t> features,
                     const GrowthParams& params, GrowthPolicy policy, GrowthTrace* trace) {
  Grower grower(x, grad, hess, features, params);
  Tree tree;
  OpenNode root;
  root.node = add_node(tree);
  root.lists = std::move(root_lists);
  grower.sums(root);

  if (policy == GrowthPolicy::kLevel) {
    std::vector<OpenNode> level;
    level.push_back(std::move(root));
    for (std::size_t depth = 0; depth < params.max_depth && !level.empty(); ++depth) {
      std::vector<OpenNode> next;
      for (auto& n : level) {
        n.best = grower.find(n);
        if (!n.best.valid) {
          make_leaf(tree, n);
          continue;
        }
        OpenNode left, right;
        make_split(tree, n, grower, left, right);
        next.push_back(std::move(left));
        next.push_back(std::move(right));
      }
      level = std::move(next);
    }
    for (const auto& n : level) make_leaf(tree, n);
    return tree;
  }

  std::vector<OpenNode> open;
  root.best = grower.find(root);
  open.push_back(std::move(root));
  while (open.size() < params.num_leaves) {
    std::size_t pick = open.size();
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (!open[i].best.valid) continue;
      if (pick == open.size() || beats(open[i].best.gain, open[pick].best.gain) ||
          (!beats(open[pick].best.gain, open[i].best.gain) && open[i].node < open[pick].node)) {
        pick = i;
      }
    }
    if (pick == open.size()) break;
    if (trace) {
      GrowthTrace::Step step;
      step.chosen_gain = open[pick].best.gain;
      for (const auto& n : open) {
        step.open_leaf_gains.push_back(n.best.valid ? n.best.gain : 0.0);
        RowList rows = n.lists.empty() ? RowList{} : n.lists[0];
        std::sort(rows.begin(), rows.end());
        step.open_leaf_rows.push_back(std::move(rows));
      }
      trace->steps.push_back(std::move(step));
    }
    OpenNode left, right;
    make_split(tree, open[pick], grower, left, right);
    left.best = grower.find(left);
    right.best = grower.find(right);
    open[pick] = std::move(left);
    open.push_back(std::move(right));
  }
  for (const auto& n : open) make_leaf(tree, n);
  return tree;
}

void check_params(const GrowthParams& p) {
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) throw InvalidArgument("subsample must lie in (0, 1]");
  if (!(p.colsample > 0.0 && p.colsample <= 1.0)) throw InvalidArgument("colsample must lie in (0, 1]");
  if (!(p.learning_rate > 0.0) || !std::isfinite(p.learning_rate)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (!(p.min_child_weight >= 0.0)) throw InvalidArgument("min_child_weight must be non-negative");
}

void softmax_inplace(std::span<double> s) {
  double hi = s[0];
  for (double v : s) hi = std::max(hi, v);
  double sum = 0.0;
  for (double& v : s) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : s) v /= sum;
}

void raw_scores(const BoostedEnsemble& e, std::span<const float> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), e.base_score);
  for (const auto& t : e.trees) out[t.class_id] += e.learning_rate * t.tree.predict(x);
}

std::size_t take_count(double fraction, std::size_t n) {
  if (fraction >= 1.0) return n;
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))), 1, n);
}

double mean_loss(const MatrixD& scores, std::span<const std::uint8_t> labels) {
  std::vector<double> p(scores.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    std::copy(scores.row(i).begin(), scores.row(i).end(), p.begin());
    softmax_inplace(p);
    total -= std::log(std::max(p[labels[i]], kProbFloor));
  }
  return scores.rows() ? total / static_cast<double>(scores.rows()) : 0.0;
}

}  // namespace

const char* policy_name(GrowthPolicy policy) {
  return policy == GrowthPolicy::kLevel ? "level" : "leaf";
}

GrowthPolicy parse_policy(const std::string& name) {
  if (name == "level" || name == "xgboost") return GrowthPolicy::kLevel;
  if (name == "leaf" || name == "lightgbm") return GrowthPolicy::kLeaf;
  throw InvalidArgument("unknown growth policy: " + name);
}

std::size_t Tree::find_leaf(std::span<const float> x, std::size_t* comparisons) const {
  std::size_t i = 0;
  std::size_t steps = 0;
  while (!nodes[i].is_leaf) {
    ++steps;
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[n.feature] < n.threshold ? n.left : n.right);
  }
  if (comparisons) *comparisons += steps;
  return i;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf; }));
}

std::vector<std::size_t> Tree::leaf_depths() const {
  std::vector<std::size_t> out;
  if (nodes.empty()) return out;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const auto& n = nodes[i];
    if (n.is_leaf) {
      out.push_back(d);
      continue;
    }
    stack.emplace_back(static_cast<std::size_t>(n.right), d + 1);
    stack.emplace_back(static_cast<std::size_t>(n.left), d + 1);
  }
  return out;
}

std::size_t Tree::depth() const {
  const auto d = leaf_depths();
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

bool EarlyStopping::update(std::size_t round, double val_loss) {
  if (best_round_ == 0 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_round_ = round;
    return false;
  }
  return patience_ > 0 && round - best_round_ >= patience_;
}

double split_gain(double g_left, double h_left, double g_right, double h_right) {
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return g_left * g_left / (h_left + kHessianEpsilon) + g_right * g_right / (h_right + kHessianEpsilon) -
         g * g / (h + kHessianEpsilon);
}

double leaf_weight(double g, double h) { return -g / (h + kHessianEpsilon); }

Tree grow_tree(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
               std::span<const std::uint32_t> rows, std::span<const std::uint32_t> features,
               const GrowthParams& params, GrowthPolicy policy, GrowthTrace* trace) {
  check_inputs(x, grad, hess, rows, features);
  return grow_from_lists(x, grad, hess, sorted_lists(x, rows, features), features, params, policy, trace);
}

SplitChoice best_split(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
                       std::span<const std::uint32_t> rows, std::span<const std::uint32_t> features,
                       const GrowthParams& params) {
  check_inputs(x, grad, hess, rows, features);
  Grower grower(x, grad, hess, features, params);
  OpenNode n;
  n.lists = sorted_lists(x, rows, features);
  grower.sums(n);
  return grower.find(n);
}

BoostedEnsemble train_boosted(const PixelDataset& dataset, const GrowthParams& params, GrowthPolicy policy) {
  check_params(params);
  const auto train_rows = dataset.rows_in(Split::kTrain);
  if (train_rows.empty()) throw InvalidArgument("train split is empty");
  const auto val_rows = dataset.rows_in(Split::kVal);
  const std::size_t d = dataset.features.cols();
  const std::size_t k = kClassCount;
  for (auto l : dataset.labels) {
    if (l >= k) throw InvalidArgument("label out of range");
  }

  auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x, std::vector<std::uint8_t>& y) {
    x = Matrix(rows.size(), d);
    y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy_n(dataset.features.row(rows[i]).begin(), d, x.row(i).begin());
      y[i] = dataset.labels[rows[i]];
    }
  };
  Matrix xt, xv;
  std::vector<std::uint8_t> yt, yv;
  gather(train_rows, xt, yt);
  gather(val_rows, xv, yv);
  const std::size_t n = xt.rows();

  std::vector<RowList> order;
  {
    RowList all(n);
    std::iota(all.begin(), all.end(), 0u);
    RowList all_features(d);
    std::iota(all_features.begin(), all_features.end(), 0u);
    order = sorted_lists(xt, all, all_features);
  }

  BoostedEnsemble e;
  e.policy = policy;
  e.learning_rate = params.learning_rate;
  e.class_count = k;
  e.feature_count = d;
  e.params = params;

  MatrixD st(n, k), sv(xv.rows(), k);
  std::fill(st.storage().begin(), st.storage().end(), e.base_score);
  std::fill(sv.storage().begin(), sv.storage().end(), e.base_score);

  Rng rng(params.seed);
  EarlyStopping stopper(params.early_stop_patience);
  const bool stopping = params.early_stop_patience > 0 && !val_rows.empty();
  std::vector<double> grad(n), hess(n);
  MatrixD probs(n, k);
  std::vector<std::uint8_t> in_sample(n, 1);
  RowList row_perm(n);
  RowList feat_perm(d);
  std::size_t rounds_done = 0;

  for (std::size_t round = 0; round < params.num_boost_round; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      auto p = probs.row(i);
      std::copy(st.row(i).begin(), st.row(i).end(), p.begin());
      softmax_inplace(p);
    }
    const std::size_t keep = take_count(params.subsample, n);
    if (keep < n) {
      std::iota(row_perm.begin(), row_perm.end(), 0u);
      rng.shuffle(std::span<std::uint32_t>(row_perm));
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (std::size_t i = 0; i < keep; ++i) in_sample[row_perm[i]] = 1;
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = probs(i, c);
        grad[i] = p - (yt[i] == c ? 1.0 : 0.0);
        hess[i] = p * (1.0 - p);
      }
      RowList features;
      const std::size_t fkeep = take_count(params.colsample, d);
      if (fkeep < d) {
        std::iota(feat_perm.begin(), feat_perm.end(), 0u);
        rng.shuffle(std::span<std::uint32_t>(feat_perm));
        features.assign(feat_perm.begin(), feat_perm.begin() + static_cast<std::ptrdiff_t>(fkeep));
        std::sort(features.begin(), features.end());
      } else {
        features = feat_perm;
        std::iota(features.begin(), features.end(), 0u);
      }
      std::vector<RowList> lists(features.size());
      for (std::size_t fi = 0; fi < features.size(); ++fi) {
        const auto& src = order[features[fi]];
        if (keep == n) {
          lists[fi] = src;
        } else {
          lists[fi].reserve(keep);
          for (auto r : src) {
            if (in_sample[r]) lists[fi].push_back(r);
          }
        }
      }
      Tree tree = grow_from_lists(xt, grad, hess, std::move(lists), features, params, policy, nullptr);
      for (std::size_t i = 0; i < n; ++i) st(i, c) += e.learning_rate * tree.predict(xt.row(i));
      for (std::size_t i = 0; i < xv.rows(); ++i) sv(i, c) += e.learning_rate * tree.predict(xv.row(i));
      e.trees.push_back({static_cast<std::uint32_t>(round), static_cast<std::uint32_t>(c), std::move(tree)});
    }
    rounds_done = round + 1;
    if (!val_rows.empty()) {
      const double loss = mean_loss(sv, yv);
      e.val_loss_history.push_back(loss);
      if (stopping && stopper.update(rounds_done, loss)) break;
    }
  }

  e.best_round = rounds_done;
  if (stopping && stopper.best_round() > 0) {
    e.best_round = stopper.best_round();
    e.trees.resize(e.best_round * k);
  }
  return e;
}

std::vector<double> predict(const BoostedEnsemble& ensemble, std::span<const float> features) {
  if (features.size() != ensemble.feature_count) {
    throw InvalidArgument("feature length does not match the ensemble");
  }
  std::vector<double> p(ensemble.class_count);
  raw_scores(ensemble, features, p);
  softmax_inplace(p);
  return p;
}

std::size_t predict_class(const BoostedEnsemble& ensemble, std::span<const float> features) {
  const auto p = predict(ensemble, features);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void predict_batch(const BoostedEnsemble& ensemble, const Matrix& rows, MatrixD& probs) {
  if (rows.cols() != ensemble.feature_count) {
    throw InvalidArgument("feature length does not match the ensemble");
  }
  probs = MatrixD(rows.rows(), ensemble.class_count);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto p = probs.row(i);
    raw_scores(ensemble, rows.row(i), p);
    softmax_inplace(p);
  }
}

double accuracy(const BoostedEnsemble& ensemble, const PixelDataset& dataset, Split split) {
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.split[i] != split) continue;
    hit += predict_class(ensemble, dataset.features.row(i)) == dataset.labels[i];
    ++total;
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

double softmax_loss(const BoostedEnsemble& ensemble, const PixelDataset& dataset, Split split) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.split[i] != split) continue;
    const auto p = predict(ensemble, dataset.features.row(i));
    total -= std::log(std::max(p[dataset.labels[i]], kProbFloor));
    ++count;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

TreeStats tree_stats(const BoostedEnsemble& ensemble) {
  TreeStats s;
  s.trees = ensemble.trees.size();
  double depth_sum = 0.0;
  for (const auto& t : ensemble.trees) {
    const auto depths = t.tree.leaf_depths();
    s.leaves += depths.size();
    s.nodes += t.tree.node_count();
    const std::size_t d = depths.empty() ? 0 : *std::max_element(depths.begin(), depths.end());
    s.max_depth = std::max(s.max_depth, d);
    depth_sum += static_cast<double>(d);
  }
  s.mean_depth = s.trees ? depth_sum / static_cast<double>(s.trees) : 0.0;
  s.bytes_float64 = s.nodes * kValuesPerNode * 8;
  return s;
}

// GBT1 layout: magic, u8 policy, f64 learning rate, f64 base score,
// u32 class count, u32 feature count, u32 tree count; per tree u32 round,
// u32 class id, u32 node count, then pre-order 9-byte records
// (u8 0 + f64 leaf value, or u8 1 + u32 feature + f32 threshold).
std::vector<std::uint8_t> encode_ensemble(const BoostedEnsemble& ensemble) {
  ByteWriter w;
  w.magic("GBT1");
  w.u8(static_cast<std::uint8_t>(ensemble.policy));
  w.f64(ensemble.learning_rate);
  w.f64(ensemble.base_score);
  w.u32(static_cast<std::uint32_t>(ensemble.class_count));
  w.u32(static_cast<std::uint32_t>(ensemble.feature_count));
  w.u32(static_cast<std::uint32_t>(ensemble.trees.size()));
  for (const auto& t : ensemble.trees) {
    w.u32(t.round);
    w.u32(t.class_id);
    w.u32(static_cast<std::uint32_t>(t.tree.nodes.size()));
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const auto& n = t.tree.nodes[stack.back()];
      stack.pop_back();
      if (n.is_leaf) {
        w.u8(0);
        w.f64(n.value);
      } else {
        w.u8(1);
        w.u32(n.feature);
        w.f32(n.threshold);
        stack.push_back(static_cast<std::size_t>(n.right));
        stack.push_back(static_cast<std::size_t>(n.left));
      }
    }
  }
  return w.data();
}

BoostedEnsemble decode_ensemble(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("GBT1");
  BoostedEnsemble e;
  const std::size_t policy_at = r.offset();
  const auto policy = r.u8();
  if (policy > 1) throw FormatError("unknown growth policy", policy_at);
  e.policy = static_cast<GrowthPolicy>(policy);
  const std::size_t lr_at = r.offset();
  e.learning_rate = r.f64();
  e.base_score = r.f64();
  if (!std::isfinite(e.learning_rate) || !(e.learning_rate > 0.0) || !std::isfinite(e.base_score)) {
    throw FormatError("learning rate or base score is invalid", lr_at);
  }
  e.params.learning_rate = e.learning_rate;
  const std::size_t counts_at = r.offset();
  e.class_count = r.u32();
  e.feature_count = r.u32();
  if (e.class_count < 1 || e.class_count > 255 || e.feature_count < 1) {
    throw FormatError("class or feature count is invalid", counts_at);
  }
  const std::size_t tree_count = r.u32();
  if (tree_count > r.remaining() / 21) throw FormatError("tree count exceeds payload", counts_at + 8);
  e.trees.reserve(tree_count);
  for (std::size_t ti = 0; ti < tree_count; ++ti) {
    BoostedTree t;
    t.round = r.u32();
    const std::size_t class_at = r.offset();
    t.class_id = r.u32();
    if (t.class_id >= e.class_count) throw FormatError("tree class id out of range", class_at);
    const std::size_t nodes_at = r.offset();
    const std::size_t node_count = r.u32();
    if (node_count == 0 || node_count > r.remaining() / 9) {
      throw FormatError("node count is invalid", nodes_at);
    }
    t.tree.nodes.reserve(node_count);
    std::vector<std::pair<std::int32_t, bool>> pending;  // (parent, is_right)
    for (std::size_t i = 0; i < node_count; ++i) {
      const std::size_t at = r.offset();
      const auto idx = static_cast<std::int32_t>(i);
      if (i > 0) {
        if (pending.empty()) throw FormatError("node records past the end of the tree", at);
        auto [parent, is_right] = pending.back();
        pending.pop_back();
        auto& p = t.tree.nodes[static_cast<std::size_t>(parent)];
        (is_right ? p.right : p.left) = idx;
      }
      TreeNode n;
      const auto kind = r.u8();
      if (kind == 0) {
        n.value = r.f64();
        if (!std::isfinite(n.value)) throw FormatError("leaf value is not finite", at);
      } else if (kind == 1) {
        n.is_leaf = false;
        n.feature = r.u32();
        n.threshold = r.f32();
        if (n.feature >= e.feature_count) throw FormatError("split feature out of range", at);
        if (std::isnan(n.threshold)) throw FormatError("split threshold is NaN", at);
      } else {
        throw FormatError("unknown node kind", at);
      }
      t.tree.nodes.push_back(n);
      if (!n.is_leaf) {
        pending.emplace_back(idx, true);
        pending.emplace_back(idx, false);
      }
    }
    if (!pending.empty()) throw FormatError("tree ends with unfilled children", r.offset());
    e.trees.push_back(std::move(t));
  }
  r.expect_end();
  return e;
}

void write_ensemble(const BoostedEnsemble& ensemble, const std::filesystem::path& path) {
  write_file(path, encode_ensemble(ensemble));
}

BoostedEnsemble read_ensemble(const std::filesystem::path& path) { return decode_ensemble(read_file(path)); }

}  // namespace specmask

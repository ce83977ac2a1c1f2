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

// specmask command-line tool.
//
// Exit codes: 0 success, 2 invalid arguments, 3 data/format/IO errors.
// Options not given on the command line are filled from a key=value config
// file (--config, else $SPECMASK_CONFIG). A key "<command>.<option>" takes
// precedence over a bare "<option>".

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specmask/binary_io.hpp"
#include "specmask/cnn.hpp"
#include "specmask/cnn_io.hpp"
#include "specmask/compress.hpp"
#include "specmask/config.hpp"
#include "specmask/cost.hpp"
#include "specmask/data.hpp"
#include "specmask/errors.hpp"
#include "specmask/eval.hpp"
#include "specmask/gbt.hpp"
#include "specmask/pipeline.hpp"
#include "specmask/reduce.hpp"

namespace fs = std::filesystem;
using namespace specmask;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitData = 3;

struct Options {
  // shared
  std::uint64_t seed = 0;
  std::string data;
  std::string out;
  std::string model;
  std::vector<std::string> models;
  std::string cube;
  std::string norm;

  // synth
  std::string out_dir = "scenes";
  std::size_t scenes = 6;
  std::uint32_t height = 64;
  std::uint32_t width = 64;
  std::uint32_t bands = 120;
  double sigma = 0.01;
  std::string layout = "thirds";
  double cloud_fraction = 0.5;
  std::uint32_t cell = 4;

  // ingest
  std::string scene_dir = "scenes";
  std::size_t n_train = 4;
  std::size_t n_val = 1;
  std::size_t n_test = 1;
  std::string norm_out;

  // cnn training
  std::size_t epochs = 2;
  std::size_t batch = 32;
  double step_size = 0.05;

  // compression
  std::size_t budget = 1600;
  std::size_t finetune_epochs = 1;

  // reduction
  std::size_t components = 4;
  std::string projector;
  bool bias_free = false;

  // boosting
  std::string policy = "level";
  std::size_t max_depth = 6;
  double min_child_weight = 1.0;
  double subsample = 1.0;
  double colsample = 1.0;
  double learning_rate = 0.3;
  std::size_t rounds = 100;
  std::size_t num_leaves = 31;
  std::size_t min_data_in_leaf = 1;
  std::size_t patience = 5;
  std::size_t trials = 4;

  // eval
  std::string split = "test";
  std::string positive = "cloud";
  std::string name;
  std::string csv;

  // cost
  bool default_arch = false;
  std::size_t input_length = 112;
  std::string budget_config;

  // bench / mask / decide
  std::size_t repetitions = 5;
  double threshold = kDefaultDownlinkThreshold;
  std::string mask;
};

void print_kv(const std::string& key, const std::string& value) { std::printf("%s=%s\n", key.c_str(), value.c_str()); }

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw InvalidArgument("unknown split: " + s);
}

std::size_t parse_class(const std::string& s) {
  for (std::size_t k = 0; k < kClassCount; ++k) {
    if (s == class_name(k) || s == std::to_string(k)) return k;
  }
  throw InvalidArgument("unknown class: " + s);
}

SceneLayout parse_layout(const std::string& s) {
  if (s == "thirds") return SceneLayout::kThirds;
  if (s == "checkerboard") return SceneLayout::kCheckerboard;
  if (s == "cloud-fraction") return SceneLayout::kCloudFraction;
  throw InvalidArgument("unknown layout: " + s);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidArgument(std::string("missing required option ") + flag);
}

TrainConfig train_config(const Options& o) {
  TrainConfig c;
  c.epochs = o.epochs;
  c.batch = o.batch;
  c.step_size = o.step_size;
  c.seed = o.seed;
  return c;
}

GrowthParams growth_params(const Options& o) {
  GrowthParams p;
  p.max_depth = o.max_depth;
  p.min_child_weight = o.min_child_weight;
  p.subsample = o.subsample;
  p.colsample = o.colsample;
  p.learning_rate = o.learning_rate;
  p.num_boost_round = o.rounds;
  p.num_leaves = o.num_leaves;
  p.min_data_in_leaf = o.min_data_in_leaf;
  p.early_stop_patience = o.patience;
  p.seed = o.seed;
  return p;
}

void print_history(const TrainHistory& h) {
  for (std::size_t e = 0; e < h.val_accuracy.size(); ++e) {
    std::printf("epoch=%zu train_loss=%s val_accuracy=%s\n", e + 1, num(h.train_loss[e]).c_str(),
                num(h.val_accuracy[e]).c_str());
  }
}

void print_stats(const TreeStats& s) {
  print_kv("trees", std::to_string(s.trees));
  print_kv("nodes", std::to_string(s.nodes));
  print_kv("leaves", std::to_string(s.leaves));
  print_kv("max_depth", std::to_string(s.max_depth));
  print_kv("mean_depth", num(s.mean_depth, 3));
  print_kv("bytes_float64", std::to_string(s.bytes_float64));
}

std::unique_ptr<NormStats> maybe_norm(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<NormStats>(read_norm_stats(path));
}

int cmd_synth(const Options& o) {
  SynthConfig cfg;
  cfg.height = o.height;
  cfg.width = o.width;
  cfg.bands = o.bands;
  cfg.noise_sigma = o.sigma;
  cfg.layout = parse_layout(o.layout);
  cfg.cloud_fraction = o.cloud_fraction;
  cfg.checker_cell = o.cell;
  if (o.scenes == 0) throw InvalidArgument("--scenes must be positive");
  fs::create_directories(o.out_dir);
  for (std::size_t i = 0; i < o.scenes; ++i) {
    const Scene scene = synth_scene(cfg, o.seed + i);
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%03zu", i);
    const fs::path base = fs::path(o.out_dir) / stem;
    write_cube(scene.cube, fs::path(base).replace_extension(".cube"));
    write_labels(scene.labels, fs::path(base).replace_extension(".labels"));
    std::printf("wrote=%s.cube cloud_fraction=%s\n", base.string().c_str(),
                num(cloud_fraction(scene.labels.labels)).c_str());
  }
  return kExitOk;
}

int cmd_ingest(const Options& o) {
  require(o.out, "--out");
  if (!fs::is_directory(o.scene_dir)) throw IoError("scene directory not found: " + o.scene_dir);
  std::vector<fs::path> cubes;
  for (const auto& entry : fs::directory_iterator(o.scene_dir)) {
    if (entry.path().extension() == ".cube") cubes.push_back(entry.path());
  }
  std::sort(cubes.begin(), cubes.end());
  std::vector<Scene> scenes;
  for (const auto& c : cubes) {
    scenes.push_back({read_cube(c), read_labels(fs::path(c).replace_extension(".labels"))});
  }
  if (scenes.size() < o.n_train + o.n_val + o.n_test) {
    throw InvalidArgument("found " + std::to_string(scenes.size()) + " scenes, split needs " +
                          std::to_string(o.n_train + o.n_val + o.n_test));
  }
  PixelDataset ds = split_dataset(scenes, SplitSpec::contiguous(o.n_train, o.n_val, o.n_test));
  const NormStats stats = normalize_dataset(ds);
  write_dataset(ds, o.out);
  const std::string norm_path = o.norm_out.empty() ? o.out + ".norm" : o.norm_out;
  write_norm_stats(stats, norm_path);
  print_kv("scenes", std::to_string(scenes.size()));
  print_kv("features", std::to_string(ds.feature_count));
  print_kv("train_rows", std::to_string(ds.count(Split::kTrain)));
  print_kv("val_rows", std::to_string(ds.count(Split::kVal)));
  print_kv("test_rows", std::to_string(ds.count(Split::kTest)));
  print_kv("norm", norm_path);
  if (stats.warning()) std::fprintf(stderr, "warning: some features have near-zero variance\n");
  return kExitOk;
}

int cmd_train_cnn(const Options& o) {
  require(o.data, "--data");
  require(o.out, "--out");
  const PixelDataset ds = read_dataset(o.data);
  SpectralCnn model = build_default_arch(ds.feature_count, kClassCount, o.seed);
  const auto params = count_params(model);
  print_kv("params", std::to_string(params.total));
  auto result = train(std::move(model), ds, train_config(o));
  print_history(result.history);
  print_kv("test_accuracy", num(accuracy(result.model, ds, Split::kTest)));
  serialize(result.model, o.out);
  return kExitOk;
}

int cmd_train_gbt(const Options& o) {
  require(o.data, "--data");
  require(o.out, "--out");
  const PixelDataset ds = read_dataset(o.data);
  const auto e = train_boosted(ds, growth_params(o), parse_policy(o.policy));
  print_kv("policy", policy_name(e.policy));
  print_kv("best_round", std::to_string(e.best_round));
  print_stats(tree_stats(e));
  print_kv("test_accuracy", num(accuracy(e, ds, Split::kTest)));
  write_ensemble(e, o.out);
  return kExitOk;
}

int cmd_compress(const Options& o) {
  require(o.model, "--model");
  require(o.out, "--out");
  auto loaded = deserialize(o.model);
  const auto* cnn = std::get_if<SpectralCnn>(&loaded);
  if (!cnn) throw InvalidArgument("compress expects a plain CNN model");
  auto result = compress_model(*cnn, o.budget);
  std::string ranks;
  for (std::size_t i = 0; i < result.ranks.size(); ++i) {
    ranks += (i ? "," : "") + std::to_string(result.ranks[i]);
  }
  print_kv("ranks", ranks);
  print_kv("params", std::to_string(result.total_params));
  print_kv("achievable_minimum", std::to_string(result.achievable_minimum));
  print_kv("budget_met", result.budget_met ? "true" : "false");
  SpectralCnn model = std::move(result.model);
  if (!o.data.empty() && o.finetune_epochs > 0) {
    const PixelDataset ds = read_dataset(o.data);
    print_kv("accuracy_before_finetune", num(accuracy(model, ds, Split::kTest)));
    TrainConfig c = train_config(o);
    c.epochs = o.finetune_epochs;
    auto tuned = train(std::move(model), ds, c);
    print_history(tuned.history);
    model = std::move(tuned.model);
    print_kv("test_accuracy", num(accuracy(model, ds, Split::kTest)));
  }
  serialize(model, o.out);
  return result.budget_met ? kExitOk : kExitArgs;
}

int cmd_pca_fit(const Options& o) {
  require(o.data, "--data");
  require(o.out, "--out");
  const PixelDataset ds = read_dataset(o.data);
  const auto p = fit_pca(ds, o.components);
  const double thresholds[] = {0.9, 0.99, 0.999};
  const auto report = explained_variance_report(p, thresholds);
  for (std::size_t i = 0; i < report.size(); ++i) {
    print_kv("components_for_" + num(thresholds[i], 3), std::to_string(report[i]));
  }
  double kept = 0.0;
  for (std::size_t k = 0; k < p.components; ++k) kept += p.explained[k];
  print_kv("explained_by_kept", num(kept));
  write_projector(p, o.out);
  return kExitOk;
}

int cmd_reduce(const Options& o) {
  require(o.data, "--data");
  require(o.projector, "--projector");
  require(o.out, "--out");
  const PixelDataset ds = read_dataset(o.data);
  const PcaProjector p = read_projector(o.projector);
  HeadOptions head;
  head.bias_free_affine = o.bias_free;
  head.seed = o.seed;
  ReducedModel model = build_reduced_model(p, head);
  const auto params = count_params(model);
  print_kv("trainable", std::to_string(params.trainable));
  print_kv("params", std::to_string(params.total));
  auto result = train(std::move(model), ds, train_config(o));
  print_history(result.history);
  print_kv("test_accuracy", num(accuracy(result.model, ds, Split::kTest)));
  serialize(result.model, o.out);
  return kExitOk;
}

int cmd_search(const Options& o) {
  require(o.data, "--data");
  const PixelDataset ds = read_dataset(o.data);
  const GrowthPolicy policy = parse_policy(o.policy);
  const auto stages = policy == GrowthPolicy::kLevel ? level_policy_stages() : leaf_policy_stages();
  const auto result = staged_search(ds, growth_params(o), policy, stages, o.trials, o.seed);
  for (const auto& t : result.trials) {
    std::printf("stage=%s", stages[t.stage].name.c_str());
    for (const auto& r : stages[t.stage].ranges) {
      std::printf(" %s=%s", param_name(r.param), num(get_param(t.params, r.param), is_integer_param(r.param) ? 0 : 4).c_str());
    }
    std::printf(" val_loss=%s\n", num(t.val_loss).c_str());
  }
  for (const auto& stage : stages) {
    for (const auto& r : stage.ranges) {
      print_kv(std::string("best.") + param_name(r.param), num(get_param(result.best, r.param), is_integer_param(r.param) ? 0 : 4));
    }
  }
  print_kv("best_val_loss", num(result.best_val_loss));
  if (!o.out.empty()) write_ensemble(train_boosted(ds, result.best, policy), o.out);
  return kExitOk;
}

int cmd_eval(const Options& o) {
  require(o.data, "--data");
  const auto paths = o.models.empty() ? std::vector<std::string>{o.model} : o.models;
  require(paths.front(), "--model");
  const PixelDataset all = read_dataset(o.data);
  const PixelDataset ds = all.subset(parse_split(o.split));
  if (ds.size() == 0) throw InvalidData("no rows in split " + o.split);
  const std::size_t positive = parse_class(o.positive);
  std::string csv = csv_header() + "\n";
  for (const auto& path : paths) {
    const Classifier c = load_classifier(path);
    MatrixD probs;
    classify_rows(c, ds.features, probs);
    std::vector<std::uint8_t> pred(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto p = probs.row(i);
      pred[i] = static_cast<std::uint8_t>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    const auto report = metrics_from_confusion(confusion(pred, ds.labels), positive);
    const std::string name = !o.name.empty() && paths.size() == 1 ? o.name : fs::path(path).stem().string();
    std::fputs(format_key_value(report, name).c_str(), stdout);
    csv += format_csv_row(report, name) + "\n";
  }
  if (!o.csv.empty()) write_file(o.csv, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  return kExitOk;
}

int cmd_cost(const Options& o) {
  std::vector<CostReport> reports;
  if (o.default_arch) {
    auto r = cnn_cost(build_default_arch(o.input_length));
    r.model = "default-cnn";
    reports.push_back(r);
  }
  for (const auto& path : o.models) {
    const Classifier c = load_classifier(path);
    auto r = std::visit([](const auto& m) {
      if constexpr (std::is_same_v<std::decay_t<decltype(m)>, BoostedEnsemble>) return gbt_cost(m);
      else return cnn_cost(m);
    }, c);
    r.model = fs::path(path).stem().string();
    reports.push_back(r);
  }
  if (reports.empty()) throw InvalidArgument("give --model or --default-arch");
  const HardwareBudget budget =
      o.budget_config.empty() ? HardwareBudget{} : budget_from_config(read_config(o.budget_config));
  std::fputs(format_cost_table(reports).c_str(), stdout);
  for (const auto& r : reports) {
    const auto f = feasibility(r, budget);
    std::printf("feasibility model=%s budget=%s fits_cache=%s cache_margin_bytes=%lld fits_params=%s "
                "param_margin=%lld\n",
                r.model.c_str(), budget.name.c_str(), f.fits_cache ? "true" : "false",
                static_cast<long long>(f.cache_margin_bytes), f.fits_param_limit ? "true" : "false",
                static_cast<long long>(f.param_margin));
  }
  if (!o.csv.empty()) {
    std::string csv = cost_csv_header() + "\n";
    for (const auto& r : reports) csv += format_cost_csv_row(r) + "\n";
    write_file(o.csv, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  }
  return kExitOk;
}

int cmd_bench(const Options& o) {
  require(o.cube, "--cube");
  if (o.models.empty()) throw InvalidArgument("missing required option --model");
  const SpectralCube cube = read_cube(o.cube);
  const auto norm = maybe_norm(o.norm);
  for (const auto& path : o.models) {
    const Classifier c = load_classifier(path);
    const auto t = run_benchmark(c, cube, o.repetitions, norm.get());
    std::printf("model=%s kind=%s first_image_ms=%s rest_median_ms=%s rest_mean_ms=%s pixels_per_s=%s\n",
                fs::path(path).stem().string().c_str(), t.model.c_str(), num(t.first_image * 1e3, 3).c_str(),
                num(t.rest_median * 1e3, 3).c_str(), num(t.rest_mean * 1e3, 3).c_str(),
                num(t.pixels_per_second, 0).c_str());
  }
  return kExitOk;
}

int cmd_mask(const Options& o) {
  require(o.model, "--model");
  require(o.cube, "--cube");
  require(o.out, "--out");
  const Classifier c = load_classifier(o.model);
  const auto norm = maybe_norm(o.norm);
  const MaskResult m = classify_cube(c, read_cube(o.cube), norm.get());
  const auto files = export_mask(m, o.out);
  const auto d = decide_downlink(m, o.threshold);
  print_kv("classes", files.classes.string());
  print_kv("confidence", files.confidence.string());
  print_kv("cloud_fraction", num(m.cloud_fraction));
  print_kv("threshold", num(d.threshold, 3));
  print_kv("keep", d.keep ? "true" : "false");
  return kExitOk;
}

int cmd_decide(const Options& o) {
  require(o.mask, "--mask");
  const Graymap g = read_pgm(o.mask);
  for (auto v : g.pixels) {
    if (v >= kClassCount) throw InvalidData("class map holds a value outside 0..2");
  }
  const auto d = decide_downlink(cloud_fraction(g.pixels), o.threshold);
  print_kv("cloud_fraction", num(d.cloud_fraction));
  print_kv("threshold", num(d.threshold, 3));
  print_kv("keep", d.keep ? "true" : "false");
  return kExitOk;
}

void apply_config(CLI::App* sub, const ConfigMap& config) {
  for (CLI::Option* opt : sub->get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    auto v = config_get(config, sub->get_name() + "." + name);
    if (!v) v = config_get(config, name);
    if (!v) continue;
    if (opt->get_items_expected_max() > 1) {
      std::size_t start = 0;
      while (start <= v->size()) {
        const auto comma = v->find(',', start);
        opt->add_result(v->substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      opt->add_result(*v);
    }
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specmask: pixel-wise cloud masking for hyperspectral imagery"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file (default: $SPECMASK_CONFIG)");

  Options o;
  std::map<std::string, std::function<int(const Options&)>> handlers;
  auto command = [&](const char* name, const char* help, std::function<int(const Options&)> fn) {
    handlers[name] = std::move(fn);
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--seed", o.seed, "random seed");
    return sub;
  };

  auto* synth = command("synth", "write synthetic labelled scenes", cmd_synth);
  synth->add_option("--out-dir", o.out_dir, "output directory");
  synth->add_option("--scenes", o.scenes, "number of scenes");
  synth->add_option("--height", o.height);
  synth->add_option("--width", o.width);
  synth->add_option("--bands", o.bands);
  synth->add_option("--sigma", o.sigma, "noise standard deviation (radiance units)");
  synth->add_option("--layout", o.layout, "thirds | checkerboard | cloud-fraction");
  synth->add_option("--cloud-fraction", o.cloud_fraction);
  synth->add_option("--cell", o.cell, "checkerboard cell size");

  auto* ingest = command("ingest", "build a normalized pixel dataset from scene files", cmd_ingest);
  ingest->add_option("--scene-dir", o.scene_dir, "directory of .cube/.labels pairs");
  ingest->add_option("--train", o.n_train, "scenes for training (in name order)");
  ingest->add_option("--val", o.n_val);
  ingest->add_option("--test", o.n_test);
  ingest->add_option("--out", o.out, "dataset file");
  ingest->add_option("--norm-out", o.norm_out, "normalization file (default <out>.norm)");

  auto* train_cnn = command("train-cnn", "train the spectral CNN", cmd_train_cnn);
  train_cnn->add_option("--data", o.data);
  train_cnn->add_option("--out", o.out);
  train_cnn->add_option("--epochs", o.epochs);
  train_cnn->add_option("--batch", o.batch);
  train_cnn->add_option("--step-size", o.step_size);

  auto* train_gbt = command("train-gbt", "train a boosted tree ensemble", cmd_train_gbt);
  auto* search = command("search", "staged hyperparameter search for boosting", cmd_search);
  for (CLI::App* sub : {train_gbt, search}) {
    sub->add_option("--data", o.data);
    sub->add_option("--out", o.out);
    sub->add_option("--policy", o.policy, "level | leaf");
    sub->add_option("--max-depth", o.max_depth);
    sub->add_option("--min-child-weight", o.min_child_weight);
    sub->add_option("--subsample", o.subsample);
    sub->add_option("--colsample", o.colsample);
    sub->add_option("--learning-rate", o.learning_rate);
    sub->add_option("--rounds", o.rounds);
    sub->add_option("--num-leaves", o.num_leaves);
    sub->add_option("--min-data-in-leaf", o.min_data_in_leaf);
    sub->add_option("--patience", o.patience, "early stopping patience, 0 disables");
  }
  search->add_option("--trials", o.trials, "trials per stage");

  auto* compress = command("compress", "low-rank factorize conv layers to a parameter budget", cmd_compress);
  compress->add_option("--model", o.model);
  compress->add_option("--out", o.out);
  compress->add_option("--budget", o.budget, "maximum parameter count");
  compress->add_option("--data", o.data, "dataset for fine-tuning");
  compress->add_option("--finetune-epochs", o.finetune_epochs);
  compress->add_option("--batch", o.batch);
  compress->add_option("--step-size", o.step_size);

  auto* pca_fit = command("pca-fit", "fit a PCA projector on train rows", cmd_pca_fit);
  pca_fit->add_option("--data", o.data);
  pca_fit->add_option("--components", o.components);
  pca_fit->add_option("--out", o.out);

  auto* reduce = command("reduce", "train a small head on projected features", cmd_reduce);
  reduce->add_option("--data", o.data);
  reduce->add_option("--projector", o.projector);
  reduce->add_option("--out", o.out);
  reduce->add_flag("--bias-free", o.bias_free, "bias-free head when it is a bare affine map");
  reduce->add_option("--epochs", o.epochs);
  reduce->add_option("--batch", o.batch);
  reduce->add_option("--step-size", o.step_size);

  auto* eval = command("eval", "accuracy metrics on a dataset split", cmd_eval);
  eval->add_option("--data", o.data);
  eval->add_option("--model", o.models, "model file(s)");
  eval->add_option("--split", o.split, "train | val | test");
  eval->add_option("--positive", o.positive, "class for the binary metrics");
  eval->add_option("--name", o.name, "model name in reports");
  eval->add_option("--csv", o.csv, "also write CSV rows here");

  auto* cost = command("cost", "per-pixel cost and hardware feasibility", cmd_cost);
  cost->add_option("--model", o.models, "model file(s)");
  cost->add_flag("--default-arch", o.default_arch, "include a freshly built default CNN");
  cost->add_option("--input-length", o.input_length, "input length for --default-arch");
  cost->add_option("--budget-config", o.budget_config, "budget profile (budget.* keys)");
  cost->add_option("--csv", o.csv);

  auto* bench = command("bench", "time whole-image classification", cmd_bench);
  bench->add_option("--model", o.models, "model file(s)");
  bench->add_option("--cube", o.cube);
  bench->add_option("--norm", o.norm, "normalization file from ingest");
  bench->add_option("--repetitions", o.repetitions);

  auto* mask = command("mask", "classify a cube and export mask images", cmd_mask);
  mask->add_option("--model", o.model);
  mask->add_option("--cube", o.cube);
  mask->add_option("--norm", o.norm, "normalization file from ingest");
  mask->add_option("--out", o.out, "output base path");
  mask->add_option("--threshold", o.threshold, "downlink cloud-fraction threshold");

  auto* decide = command("decide", "downlink decision from an exported class map", cmd_decide);
  decide->add_option("--mask", o.mask, "<base>.classes.pgm");
  decide->add_option("--threshold", o.threshold, "downlink cloud-fraction threshold");

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (config_path.empty()) {
      if (const char* env = std::getenv("SPECMASK_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) apply_config(sub, read_config(config_path));
    if (o.model.empty() && o.models.size() == 1) o.model = o.models.front();
    return handlers.at(sub->get_name())(o);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitArgs;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitArgs;
  } catch (const InvalidData& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

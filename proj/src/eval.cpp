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

#include "specmask/eval.hpp"

#include <cstdio>

#include "specmask/errors.hpp"

namespace specmask {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string fmt(double v) { return fmt(std::optional<double>(v)); }

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kClassCount; ++i)
    for (std::size_t j = 0; j < kClassCount; ++j) counts[i][j] += other.counts[i][j];
  return *this;
}

ConfusionMatrix confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size()) {
    throw InvalidArgument("predictions and labels differ in length");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kClassCount || predictions[i] >= kClassCount) {
      throw InvalidArgument("class id out of range at index " + std::to_string(i));
    }
    ++m.counts[labels[i]][predictions[i]];
  }
  return m;
}

BinaryCounts fold_binary(const ConfusionMatrix& m, std::size_t positive) {
  if (positive >= kClassCount) throw InvalidArgument("positive class out of range");
  BinaryCounts c;
  for (std::size_t t = 0; t < kClassCount; ++t) {
    for (std::size_t p = 0; p < kClassCount; ++p) {
      const auto n = m.counts[t][p];
      if (t == positive && p == positive) c.tp += n;
      else if (t == positive) c.fn += n;
      else if (p == positive) c.fp += n;
      else c.tn += n;
    }
  }
  return c;
}

BinaryMetrics binary_metrics(const BinaryCounts& c) {
  BinaryMetrics b;
  b.precision = ratio(c.tp, c.tp + c.fp);
  b.recall = ratio(c.tp, c.tp + c.fn);
  b.specificity = ratio(c.tn, c.tn + c.fp);
  b.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  b.jaccard = ratio(c.tp, c.tp + c.fp + c.fn);
  b.accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  if (b.recall && b.specificity) b.balanced_accuracy = 0.5 * (*b.recall + *b.specificity);
  return b;
}

MetricReport metrics_from_confusion(const ConfusionMatrix& m, std::size_t positive_class) {
  if (m.total() == 0) throw InvalidArgument("confusion matrix is empty");
  if (positive_class >= kClassCount) throw InvalidArgument("positive class out of range");
  MetricReport r;
  r.matrix = m;
  r.positive_class = positive_class;
  r.accuracy = static_cast<double>(m.trace()) / static_cast<double>(m.total());
  double recall_sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    r.per_class[k] = binary_metrics(fold_binary(m, k));
    if (r.per_class[k].recall) {
      recall_sum += *r.per_class[k].recall;
      ++defined;
    }
  }
  r.balanced_accuracy = recall_sum / static_cast<double>(defined);
  return r;
}

std::string format_key_value(const MetricReport& report, std::string_view model) {
  const auto& p = report.positive();
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) { out += key + "=" + value + "\n"; };
  line("model", std::string(model));
  line("pixels", std::to_string(report.matrix.total()));
  line("accuracy", fmt(report.accuracy));
  line("balanced_accuracy", fmt(report.balanced_accuracy));
  line("positive_class", class_name(report.positive_class));
  line("binary_accuracy", fmt(p.accuracy));
  line("binary_balanced_accuracy", fmt(p.balanced_accuracy));
  line("precision", fmt(p.precision));
  line("recall", fmt(p.recall));
  line("f1", fmt(p.f1));
  line("jaccard", fmt(p.jaccard));
  for (std::size_t t = 0; t < kClassCount; ++t) {
    std::string row;
    for (std::size_t q = 0; q < kClassCount; ++q) {
      if (q) row += ",";
      row += std::to_string(report.matrix.counts[t][q]);
    }
    line(std::string("confusion.") + class_name(t), row);
  }
  return out;
}

std::string csv_header() {
  return "model,pixels,accuracy,balanced_accuracy,binary_accuracy,binary_balanced_accuracy,"
         "precision,recall,f1,jaccard";
}

std::string format_csv_row(const MetricReport& report, std::string_view model) {
  const auto& p = report.positive();
  return std::string(model) + "," + std::to_string(report.matrix.total()) + "," + fmt(report.accuracy) +
         "," + fmt(report.balanced_accuracy) + "," + fmt(p.accuracy) + "," + fmt(p.balanced_accuracy) +
         "," + fmt(p.precision) + "," + fmt(p.recall) + "," + fmt(p.f1) + "," + fmt(p.jaccard);
}

}  // namespace specmask

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

// Confusion matrices and classification metrics over the three classes.

#ifndef SPECMASK_EVAL_HPP_
#define SPECMASK_EVAL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "specmask/data.hpp"

namespace specmask {

struct ConfusionMatrix {
  // counts[true][predicted]
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

  std::uint64_t total() const;
  std::uint64_t trace() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels);

// One-vs-rest folding around `positive`.
struct BinaryCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

BinaryCounts fold_binary(const ConfusionMatrix& m, std::size_t positive);

// Ratios with a zero denominator are left empty.
struct BinaryMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> f1;
  std::optional<double> jaccard;
  std::optional<double> accuracy;
  std::optional<double> balanced_accuracy;  // mean of recall and specificity
};

BinaryMetrics binary_metrics(const BinaryCounts& c);

struct MetricReport {
  double accuracy = 0.0;
  // Unweighted mean of the per-class recalls that are defined.
  double balanced_accuracy = 0.0;
  std::size_t positive_class = 2;
  std::array<BinaryMetrics, kClassCount> per_class;
  ConfusionMatrix matrix;

  const BinaryMetrics& positive() const { return per_class[positive_class]; }
};

MetricReport metrics_from_confusion(const ConfusionMatrix& m, std::size_t positive_class = 2);

// key=value lines, one per metric, prefixed by "model=<name>".
std::string format_key_value(const MetricReport& report, std::string_view model);
std::string csv_header();
std::string format_csv_row(const MetricReport& report, std::string_view model);

}  // namespace specmask

#endif  // SPECMASK_EVAL_HPP_

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

// Whole-image inference: cloud masks, mask export as binary graymaps, the
// downlink decision and per-image timing.

#ifndef SPECMASK_PIPELINE_HPP_
#define SPECMASK_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "specmask/cnn.hpp"
#include "specmask/data.hpp"
#include "specmask/gbt.hpp"
#include "specmask/reduce.hpp"

namespace specmask {

using Classifier = std::variant<SpectralCnn, ReducedModel, BoostedEnsemble>;

// Reads an SCNN model file or a GBT1 ensemble file.
Classifier load_classifier(const std::filesystem::path& path);
std::size_t input_length(const Classifier& classifier);
std::string classifier_kind(const Classifier& classifier);

// probs is resized to rows x 3.
void classify_rows(const Classifier& classifier, const Matrix& rows, MatrixD& probs);

struct MaskResult {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> classes;  // row-major
  std::vector<float> confidence;      // max class probability
  double cloud_fraction = 0.0;
};

double cloud_fraction(std::span<const std::uint8_t> classes);

// Drops invalid bands, applies norm when given, and classifies every pixel.
MaskResult classify_cube(const Classifier& classifier, const SpectralCube& cube,
                         const NormStats* norm = nullptr);

// Mask equal to the labels with full confidence.
MaskResult mask_from_labels(const LabelMap& labels);

struct Graymap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint16_t maxval = 255;
  std::vector<std::uint8_t> pixels;
};

std::vector<std::uint8_t> encode_pgm(const Graymap& image);
Graymap decode_pgm(std::span<const std::uint8_t> bytes);
Graymap read_pgm(const std::filesystem::path& path);

struct MaskFiles {
  std::filesystem::path classes;     // <base>.classes.pgm, values 0/1/2
  std::filesystem::path confidence;  // <base>.confidence.pgm, round(conf*255)
};

MaskFiles export_mask(const MaskResult& mask, const std::filesystem::path& basepath);

inline constexpr double kDefaultDownlinkThreshold = 0.7;

struct DownlinkDecision {
  bool keep = false;
  double cloud_fraction = 0.0;
  double threshold = kDefaultDownlinkThreshold;
};

DownlinkDecision decide_downlink(double cloud_fraction, double threshold = kDefaultDownlinkThreshold);
DownlinkDecision decide_downlink(const MaskResult& mask, double threshold = kDefaultDownlinkThreshold);

struct TimingReport {
  std::string model;
  std::vector<double> image_seconds;  // every timed pass, first included
  double first_image = 0.0;
  double rest_median = 0.0;  // equals first_image when only one pass ran
  double rest_mean = 0.0;
  std::size_t pixels_per_image = 0;
  double pixels_per_second = 0.0;  // from rest_median
};

// Classifies the cube `repetitions` times; the first pass is reported on its own.
TimingReport run_benchmark(const Classifier& classifier, const SpectralCube& cube, std::size_t repetitions,
                           const NormStats* norm = nullptr);

}  // namespace specmask

#endif  // SPECMASK_PIPELINE_HPP_

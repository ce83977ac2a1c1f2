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

// Hyperspectral cube and label I/O, band exclusion, Z-score normalization,
// scene-level dataset splitting and the synthetic scene generator.

#ifndef SPECMASK_DATA_HPP_
#define SPECMASK_DATA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "specmask/numerics.hpp"

namespace specmask {

inline constexpr std::size_t kClassCount = 3;

enum class PixelClass : std::uint8_t { kSea = 0, kLand = 1, kCloud = 2 };

const char* class_name(std::size_t class_id);

// height x width x bands radiance raster, pixel-major with bands interleaved.
struct SpectralCube {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t bands = 0;
  std::vector<float> radiance;     // W m^-2 sr^-1 nm^-1
  std::vector<float> wavelengths;  // nm, strictly increasing
  std::vector<bool> band_valid;

  std::size_t pixel_count() const { return std::size_t{height} * width; }
  std::span<const float> pixel(std::size_t index) const {
    return {radiance.data() + index * bands, bands};
  }
  std::size_t valid_band_count() const;
  // Throws InvalidData if any invariant is broken.
  void validate() const;
};

struct LabelMap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> labels;  // PixelClass values, row-major

  void validate() const;
};

struct CubeHeader {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t bands = 0;
  std::uint64_t payload_bytes = 0;  // radiance block only
  std::uint64_t file_bytes = 0;     // whole file
};

// Parses and size-checks the fixed 16-byte HSC1 header. Throws FormatError
// on a bad magic or short header and InvalidData if the implied file size
// overflows.
CubeHeader parse_cube_header(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_cube(const SpectralCube& cube);
SpectralCube decode_cube(std::span<const std::uint8_t> bytes);
SpectralCube read_cube(const std::filesystem::path& path);
void write_cube(const SpectralCube& cube, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_labels(const LabelMap& labels);
LabelMap decode_labels(std::span<const std::uint8_t> bytes);
LabelMap read_labels(const std::filesystem::path& path);
void write_labels(const LabelMap& labels, const std::filesystem::path& path);

// Bands flagged invalid by default on 120-band inputs: blue-edge calibration
// bands, the O2-A absorption pair near 760 nm and the red-edge tail.
inline constexpr std::array<std::size_t, 8> kDefaultExcludedBands = {0, 1, 2, 106, 107,
                                                                     117, 118, 119};

// All-valid mask, except that 120-band grids get kDefaultExcludedBands.
std::vector<bool> default_band_mask(std::size_t bands);
std::vector<bool> band_mask_excluding(std::size_t bands, std::span<const std::size_t> excluded);

std::vector<std::size_t> valid_band_indices(const SpectralCube& cube);

// N x D feature rows over the valid bands, pixels in row-major order.
Matrix exclude_bands(const SpectralCube& cube);

inline constexpr double kStdFloor = 1e-6;

struct NormStats {
  std::vector<float> means;
  std::vector<float> stds;  // population std, floored at kStdFloor
  std::vector<bool> floored;
  std::size_t feature_count = 0;

  bool warning() const;
};

// Fits per-column mean and population std over every row of train_rows.
NormStats fit_zscore(const Matrix& train_rows);
Matrix apply_zscore(const Matrix& rows, const NormStats& stats);
void apply_zscore_inplace(std::span<float> row, const NormStats& stats);

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

const char* split_name(Split s);

struct PixelDataset {
  Matrix features;                  // N x D
  std::vector<std::uint8_t> labels;  // N
  std::vector<Split> split;          // N
  std::size_t feature_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t count(Split s) const;
  std::vector<std::size_t> rows_in(Split s) const;
  // Copies the rows tagged s into a fresh dataset (tags preserved).
  PixelDataset subset(Split s) const;
};

// Scene indices per split; they must be pairwise disjoint.
struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  // First n_train scenes train, next n_val validate, next n_test test.
  static SplitSpec contiguous(std::size_t n_train, std::size_t n_val, std::size_t n_test);
};

struct Scene {
  SpectralCube cube;
  LabelMap labels;
};

// Raw (un-normalized) per-pixel rows tagged by scene membership.
PixelDataset split_dataset(std::span<const Scene> scenes, const SplitSpec& spec);

// Fits on the train-tagged rows only.
NormStats fit_zscore(const PixelDataset& dataset);
// Fits on train rows, then standardizes every row in place.
NormStats normalize_dataset(PixelDataset& dataset);

std::vector<std::uint8_t> encode_norm_stats(const NormStats& stats);
NormStats decode_norm_stats(std::span<const std::uint8_t> bytes);
void write_norm_stats(const NormStats& stats, const std::filesystem::path& path);
NormStats read_norm_stats(const std::filesystem::path& path);

void write_dataset(const PixelDataset& dataset, const std::filesystem::path& path);
PixelDataset read_dataset(const std::filesystem::path& path);

enum class SceneLayout { kThirds, kCheckerboard, kCloudFraction };

struct SynthConfig {
  std::uint32_t height = 64;
  std::uint32_t width = 64;
  std::uint32_t bands = 120;
  std::vector<float> wavelengths;  // empty: evenly spaced over 400-800 nm
  std::vector<bool> band_valid;    // empty: default_band_mask(bands)
  // Sea, land, cloud. Empty: default_prototypes(wavelengths).
  std::array<std::vector<float>, kClassCount> prototypes;
  double noise_sigma = 0.01;
  SceneLayout layout = SceneLayout::kThirds;
  double cloud_fraction = 0.5;    // kCloudFraction only
  std::uint32_t checker_cell = 4;  // kCheckerboard only
};

std::vector<float> linear_wavelengths(std::size_t bands, float lo_nm = 400.0f, float hi_nm = 800.0f);

// Smooth Gaussian-bump spectra peaking at 450 / 550 / 700 nm.
std::array<std::vector<float>, kClassCount> default_prototypes(std::span<const float> wavelengths);

// Every pixel = prototype(label) + N(0, sigma^2) per band.
Scene synth_scene(const SynthConfig& config, std::uint64_t seed);

}  // namespace specmask

#endif  // SPECMASK_DATA_HPP_

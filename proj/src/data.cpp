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

#include "specmask/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "specmask/binary_io.hpp"
#include "specmask/errors.hpp"

namespace specmask {

namespace {

constexpr std::size_t kCubeHeaderBytes = 16;
constexpr std::size_t kLabelHeaderBytes = 12;

bool checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return !__builtin_mul_overflow(a, b, &out);
}

bool checked_add(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return !__builtin_add_overflow(a, b, &out);
}

}  // namespace

const char* class_name(std::size_t class_id) {
  switch (class_id) {
    case 0: return "sea";
    case 1: return "land";
    case 2: return "cloud";
    default: return "unknown";
  }
}

std::size_t SpectralCube::valid_band_count() const {
  return static_cast<std::size_t>(std::count(band_valid.begin(), band_valid.end(), true));
}

void SpectralCube::validate() const {
  if (bands == 0) throw InvalidData("cube has zero bands");
  if (radiance.size() != pixel_count() * bands) {
    throw InvalidData("cube radiance length does not equal height*width*bands");
  }
  if (wavelengths.size() != bands || band_valid.size() != bands) {
    throw InvalidData("cube band metadata length does not equal band count");
  }
  for (std::size_t b = 1; b < wavelengths.size(); ++b) {
    if (!(wavelengths[b] > wavelengths[b - 1])) {
      throw InvalidData("cube wavelengths are not strictly increasing at band " +
                        std::to_string(b));
    }
  }
  if (valid_band_count() == 0) throw InvalidData("cube has no valid bands");
}

void LabelMap::validate() const {
  if (labels.size() != std::size_t{height} * width) {
    throw InvalidData("label map length does not equal height*width");
  }
  for (std::uint8_t v : labels) {
    if (v >= kClassCount) throw InvalidData("label value " + std::to_string(v) + " not in {0,1,2}");
  }
}

CubeHeader parse_cube_header(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("HSC1");
  CubeHeader h;
  h.height = in.u32();
  h.width = in.u32();
  h.bands = in.u32();
  if (h.bands == 0) throw InvalidData("cube header declares zero bands");
  std::uint64_t pixels = 0, values = 0, payload = 0, total = 0;
  const std::uint64_t meta = std::uint64_t{h.bands} * 5;  // f32 wavelength + u8 flag
  if (!checked_mul(h.height, h.width, pixels) || !checked_mul(pixels, h.bands, values) ||
      !checked_mul(values, 4, payload) || !checked_add(payload, meta, total) ||
      !checked_add(total, kCubeHeaderBytes, total)) {
    throw InvalidData("cube dimensions overflow a 64-bit byte count");
  }
  h.payload_bytes = payload;
  h.file_bytes = total;
  return h;
}

std::vector<std::uint8_t> encode_cube(const SpectralCube& cube) {
  cube.validate();
  ByteWriter out;
  out.magic("HSC1");
  out.u32(cube.height);
  out.u32(cube.width);
  out.u32(cube.bands);
  out.f32s(cube.wavelengths);
  for (bool v : cube.band_valid) out.u8(v ? 1 : 0);
  out.f32s(cube.radiance);
  return out.data();
}

SpectralCube decode_cube(std::span<const std::uint8_t> bytes) {
  const CubeHeader h = parse_cube_header(bytes);
  if (h.file_bytes > bytes.size()) {
    // Report the offset of the first missing byte.
    throw FormatError("truncated HSC1 file: expected " + std::to_string(h.file_bytes) +
                          " bytes, found " + std::to_string(bytes.size()),
                      bytes.size());
  }
  ByteReader in(bytes);
  in.expect_magic("HSC1");
  SpectralCube cube;
  cube.height = in.u32();
  cube.width = in.u32();
  cube.bands = in.u32();
  cube.wavelengths.resize(cube.bands);
  in.f32s(cube.wavelengths);
  cube.band_valid.resize(cube.bands);
  for (std::size_t b = 0; b < cube.bands; ++b) {
    const std::size_t at = in.offset();
    const std::uint8_t flag = in.u8();
    if (flag > 1) throw FormatError("band validity flag must be 0 or 1", at);
    cube.band_valid[b] = flag == 1;
  }
  cube.radiance.resize(cube.pixel_count() * cube.bands);
  in.f32s(cube.radiance);
  in.expect_end();
  cube.validate();
  return cube;
}

SpectralCube read_cube(const std::filesystem::path& path) { return decode_cube(read_file(path)); }

void write_cube(const SpectralCube& cube, const std::filesystem::path& path) {
  write_file(path, encode_cube(cube));
}

std::vector<std::uint8_t> encode_labels(const LabelMap& labels) {
  labels.validate();
  ByteWriter out;
  out.magic("HSL1");
  out.u32(labels.height);
  out.u32(labels.width);
  out.bytes(labels.labels);
  return out.data();
}

LabelMap decode_labels(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("HSL1");
  LabelMap m;
  m.height = in.u32();
  m.width = in.u32();
  const std::uint64_t count = std::uint64_t{m.height} * m.width;
  if (count > in.remaining()) {
    throw FormatError("truncated HSL1 file: expected " + std::to_string(count + kLabelHeaderBytes) +
                          " bytes, found " + std::to_string(bytes.size()),
                      bytes.size());
  }
  auto payload = in.bytes(static_cast<std::size_t>(count));
  m.labels.assign(payload.begin(), payload.end());
  in.expect_end();
  m.validate();
  return m;
}

LabelMap read_labels(const std::filesystem::path& path) { return decode_labels(read_file(path)); }

void write_labels(const LabelMap& labels, const std::filesystem::path& path) {
  write_file(path, encode_labels(labels));
}

std::vector<bool> band_mask_excluding(std::size_t bands, std::span<const std::size_t> excluded) {
  std::vector<bool> mask(bands, true);
  for (std::size_t b : excluded) {
    if (b >= bands) {
      throw InvalidArgument("excluded band index " + std::to_string(b) + " out of range");
    }
    mask[b] = false;
  }
  return mask;
}

std::vector<bool> default_band_mask(std::size_t bands) {
  if (bands == 120) return band_mask_excluding(bands, kDefaultExcludedBands);
  return std::vector<bool>(bands, true);
}

std::vector<std::size_t> valid_band_indices(const SpectralCube& cube) {
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < cube.band_valid.size(); ++b)
    if (cube.band_valid[b]) idx.push_back(b);
  return idx;
}

Matrix exclude_bands(const SpectralCube& cube) {
  if (cube.band_valid.size() != cube.bands) {
    throw InvalidData("band validity mask length does not equal band count");
  }
  const auto keep = valid_band_indices(cube);
  if (keep.empty()) throw InvalidData("every band is flagged invalid");
  const std::size_t n = cube.pixel_count();
  Matrix out(n, keep.size());
  for (std::size_t p = 0; p < n; ++p) {
    auto src = cube.pixel(p);
    auto dst = out.row(p);
    for (std::size_t j = 0; j < keep.size(); ++j) dst[j] = src[keep[j]];
  }
  return out;
}

bool NormStats::warning() const { return std::find(floored.begin(), floored.end(), true) != floored.end(); }

NormStats fit_zscore(const Matrix& train_rows) {
  const std::size_t n = train_rows.rows();
  const std::size_t d = train_rows.cols();
  if (n < 2) throw InvalidArgument("fit_zscore needs at least two training rows");
  require_finite(train_rows.data(), "fit_zscore");

  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = train_rows.row(r);
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = train_rows.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = row[j] - mean[j];
      var[j] += dv * dv;
    }
  }

  NormStats s;
  s.feature_count = d;
  s.means.resize(d);
  s.stds.resize(d);
  s.floored.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.means[j] = static_cast<float>(mean[j]);
    if (sd < kStdFloor) {
      s.stds[j] = static_cast<float>(kStdFloor);
      s.floored[j] = true;
    } else {
      s.stds[j] = static_cast<float>(sd);
    }
  }
  return s;
}

void apply_zscore_inplace(std::span<float> row, const NormStats& stats) {
  if (row.size() != stats.feature_count) {
    throw InvalidArgument("apply_zscore: row has " + std::to_string(row.size()) +
                          " features, stats expect " + std::to_string(stats.feature_count));
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] = static_cast<float>((static_cast<double>(row[j]) - stats.means[j]) / stats.stds[j]);
  }
}

Matrix apply_zscore(const Matrix& rows, const NormStats& stats) {
  Matrix out = rows;
  for (std::size_t r = 0; r < out.rows(); ++r) apply_zscore_inplace(out.row(r), stats);
  return out;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

std::size_t PixelDataset::count(Split s) const {
  return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
}

std::vector<std::size_t> PixelDataset::rows_in(Split s) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) rows.push_back(i);
  return rows;
}

PixelDataset PixelDataset::subset(Split s) const {
  const auto rows = rows_in(s);
  PixelDataset out;
  out.feature_count = feature_count;
  out.features = Matrix(rows.size(), feature_count);
  out.labels.reserve(rows.size());
  out.split.assign(rows.size(), s);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

SplitSpec SplitSpec::contiguous(std::size_t n_train, std::size_t n_val, std::size_t n_test) {
  SplitSpec s;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n_train; ++i) s.train.push_back(next++);
  for (std::size_t i = 0; i < n_val; ++i) s.val.push_back(next++);
  for (std::size_t i = 0; i < n_test; ++i) s.test.push_back(next++);
  return s;
}

PixelDataset split_dataset(std::span<const Scene> scenes, const SplitSpec& spec) {
  std::vector<int> owner(scenes.size(), -1);
  const std::vector<std::size_t>* lists[] = {&spec.train, &spec.val, &spec.test};
  for (int s = 0; s < 3; ++s) {
    for (std::size_t idx : *lists[s]) {
      if (idx >= scenes.size()) {
        throw InvalidArgument("split index " + std::to_string(idx) + " exceeds scene count " +
                              std::to_string(scenes.size()));
      }
      if (owner[idx] != -1) {
        throw InvalidArgument("scene " + std::to_string(idx) + " assigned to more than one split");
      }
      owner[idx] = s;
    }
  }
  if (scenes.size() >= 3 && (spec.train.empty() || spec.val.empty() || spec.test.empty())) {
    throw InvalidArgument("every split needs at least one scene when three or more are given");
  }

  const std::vector<bool>* mask = nullptr;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (owner[i] == -1) continue;
    const Scene& sc = scenes[i];
    sc.cube.validate();
    sc.labels.validate();
    if (sc.labels.height != sc.cube.height || sc.labels.width != sc.cube.width) {
      throw InvalidData("scene " + std::to_string(i) + ": label map dimensions differ from cube");
    }
    if (mask && *mask != sc.cube.band_valid) {
      throw InvalidData("scene " + std::to_string(i) + ": band validity mask differs from scene 0");
    }
    mask = &sc.cube.band_valid;
    rows += sc.cube.pixel_count();
  }

  PixelDataset ds;
  if (!mask) return ds;
  ds.feature_count = static_cast<std::size_t>(std::count(mask->begin(), mask->end(), true));
  ds.features = Matrix(rows, ds.feature_count);
  ds.labels.reserve(rows);
  ds.split.reserve(rows);
  std::size_t at = 0;
  // Rows are emitted split by split in the order the spec lists scenes.
  for (int s = 0; s < 3; ++s) {
    for (std::size_t idx : *lists[s]) {
      const Scene& sc = scenes[idx];
      Matrix feats = exclude_bands(sc.cube);
      std::copy(feats.data().begin(), feats.data().end(),
                ds.features.data().begin() + static_cast<std::ptrdiff_t>(at * ds.feature_count));
      at += feats.rows();
      ds.labels.insert(ds.labels.end(), sc.labels.labels.begin(), sc.labels.labels.end());
      ds.split.insert(ds.split.end(), feats.rows(), static_cast<Split>(s));
    }
  }
  return ds;
}

NormStats fit_zscore(const PixelDataset& dataset) {
  const auto rows = dataset.rows_in(Split::kTrain);
  Matrix train(rows.size(), dataset.feature_count);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = dataset.features.row(rows[i]);
    std::copy(src.begin(), src.end(), train.row(i).begin());
  }
  return fit_zscore(train);
}

NormStats normalize_dataset(PixelDataset& dataset) {
  NormStats stats = fit_zscore(dataset);
  for (std::size_t r = 0; r < dataset.features.rows(); ++r) {
    apply_zscore_inplace(dataset.features.row(r), stats);
  }
  return stats;
}

namespace {

void put_norm_stats(ByteWriter& out, const NormStats& stats) {
  out.u32(static_cast<std::uint32_t>(stats.feature_count));
  out.f32s(stats.means);
  out.f32s(stats.stds);
  for (std::size_t j = 0; j < stats.feature_count; ++j) out.u8(stats.floored[j] ? 1 : 0);
}

NormStats get_norm_stats(ByteReader& in) {
  NormStats s;
  s.feature_count = in.u32();
  if (s.feature_count * 9 > in.remaining()) {
    throw FormatError("truncated normalization block", in.offset());
  }
  s.means.resize(s.feature_count);
  s.stds.resize(s.feature_count);
  in.f32s(s.means);
  in.f32s(s.stds);
  s.floored.resize(s.feature_count);
  for (std::size_t j = 0; j < s.feature_count; ++j) s.floored[j] = in.u8() != 0;
  for (std::size_t j = 0; j < s.feature_count; ++j) {
    if (!(s.stds[j] > 0.0f)) throw InvalidData("normalization std must be positive");
  }
  return s;
}

}  // namespace

std::vector<std::uint8_t> encode_norm_stats(const NormStats& stats) {
  ByteWriter out;
  out.magic("NRM1");
  put_norm_stats(out, stats);
  return out.data();
}

NormStats decode_norm_stats(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("NRM1");
  NormStats s = get_norm_stats(in);
  in.expect_end();
  return s;
}

void write_norm_stats(const NormStats& stats, const std::filesystem::path& path) {
  write_file(path, encode_norm_stats(stats));
}

NormStats read_norm_stats(const std::filesystem::path& path) {
  return decode_norm_stats(read_file(path));
}

void write_dataset(const PixelDataset& dataset, const std::filesystem::path& path) {
  ByteWriter out;
  out.magic("PXD1");
  out.u32(static_cast<std::uint32_t>(dataset.size()));
  out.u32(static_cast<std::uint32_t>(dataset.feature_count));
  out.f32s(dataset.features.data());
  out.bytes(dataset.labels);
  for (Split s : dataset.split) out.u8(static_cast<std::uint8_t>(s));
  write_file(path, out.data());
}

PixelDataset read_dataset(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader in(bytes);
  in.expect_magic("PXD1");
  PixelDataset ds;
  const std::size_t n = in.u32();
  ds.feature_count = in.u32();
  const std::uint64_t need = std::uint64_t{n} * ds.feature_count * 4 + std::uint64_t{n} * 2;
  if (need > in.remaining()) throw FormatError("truncated PXD1 payload", bytes.size());
  ds.features = Matrix(n, ds.feature_count);
  in.f32s(ds.features.data());
  auto labels = in.bytes(n);
  ds.labels.assign(labels.begin(), labels.end());
  ds.split.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = in.offset();
    const std::uint8_t v = in.u8();
    if (v > 2) throw FormatError("split tag out of range", at);
    ds.split[i] = static_cast<Split>(v);
  }
  in.expect_end();
  for (std::uint8_t v : ds.labels)
    if (v >= kClassCount) throw InvalidData("dataset label out of range");
  return ds;
}

std::vector<float> linear_wavelengths(std::size_t bands, float lo_nm, float hi_nm) {
  std::vector<float> w(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    w[b] = bands == 1 ? lo_nm
                      : lo_nm + (hi_nm - lo_nm) * static_cast<float>(b) / static_cast<float>(bands - 1);
  }
  return w;
}

std::array<std::vector<float>, kClassCount> default_prototypes(std::span<const float> wavelengths) {
  struct Bump {
    double base, amplitude, peak_nm, width_nm;
  };
  // Sea is dark and blue-peaked, land peaks in the green, cloud is bright.
  constexpr Bump kBumps[kClassCount] = {
      {4.0, 18.0, 450.0, 40.0},
      {8.0, 22.0, 550.0, 45.0},
      {30.0, 35.0, 700.0, 60.0},
  };
  std::array<std::vector<float>, kClassCount> out;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    out[c].reserve(wavelengths.size());
    for (float w : wavelengths) {
      const double z = (w - kBumps[c].peak_nm) / kBumps[c].width_nm;
      out[c].push_back(static_cast<float>(kBumps[c].base + kBumps[c].amplitude * std::exp(-0.5 * z * z)));
    }
  }
  return out;
}

Scene synth_scene(const SynthConfig& config, std::uint64_t seed) {
  if (config.bands == 0) throw InvalidArgument("synth_scene: bands must be positive");
  if (config.noise_sigma < 0.0) throw InvalidArgument("synth_scene: noise sigma must be >= 0");
  if (config.layout == SceneLayout::kCloudFraction &&
      !(config.cloud_fraction >= 0.0 && config.cloud_fraction <= 1.0)) {
    throw InvalidArgument("synth_scene: cloud fraction must lie in [0, 1]");
  }

  Scene scene;
  SpectralCube& cube = scene.cube;
  cube.height = config.height;
  cube.width = config.width;
  cube.bands = config.bands;
  cube.wavelengths = config.wavelengths.empty() ? linear_wavelengths(config.bands) : config.wavelengths;
  cube.band_valid = config.band_valid.empty() ? default_band_mask(config.bands) : config.band_valid;
  if (cube.wavelengths.size() != config.bands || cube.band_valid.size() != config.bands) {
    throw InvalidArgument("synth_scene: wavelength or validity list length differs from band count");
  }

  auto prototypes = config.prototypes;
  if (std::all_of(prototypes.begin(), prototypes.end(), [](const auto& p) { return p.empty(); })) {
    prototypes = default_prototypes(cube.wavelengths);
  }
  for (const auto& p : prototypes) {
    if (p.size() != config.bands) {
      throw InvalidArgument("synth_scene: prototype length " + std::to_string(p.size()) +
                            " differs from band count " + std::to_string(config.bands));
    }
  }

  const std::size_t n = cube.pixel_count();
  LabelMap& labels = scene.labels;
  labels.height = config.height;
  labels.width = config.width;
  labels.labels.assign(n, 0);

  Rng rng(seed);
  switch (config.layout) {
    case SceneLayout::kThirds:
      for (std::size_t r = 0; r < config.height; ++r) {
        const auto cls = static_cast<std::uint8_t>(r * kClassCount / config.height);
        std::fill_n(labels.labels.begin() + static_cast<std::ptrdiff_t>(r * config.width), config.width, cls);
      }
      break;
    case SceneLayout::kCheckerboard: {
      const std::size_t cell = std::max<std::uint32_t>(config.checker_cell, 1);
      for (std::size_t r = 0; r < config.height; ++r)
        for (std::size_t c = 0; c < config.width; ++c)
          labels.labels[r * config.width + c] = static_cast<std::uint8_t>((r / cell + c / cell) % kClassCount);
      break;
    }
    case SceneLayout::kCloudFraction: {
      const auto clouds = static_cast<std::size_t>(std::llround(config.cloud_fraction * static_cast<double>(n)));
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span<std::size_t>(order));
      const std::size_t rest = n - clouds;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t cls;
        if (i < clouds) {
          cls = static_cast<std::uint8_t>(PixelClass::kCloud);
        } else {
          cls = static_cast<std::uint8_t>((i - clouds) < rest / 2 ? PixelClass::kSea : PixelClass::kLand);
        }
        labels.labels[order[i]] = cls;
      }
      break;
    }
  }

  cube.radiance.resize(n * config.bands);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& proto = prototypes[labels.labels[p]];
    float* dst = cube.radiance.data() + p * config.bands;
    for (std::size_t b = 0; b < config.bands; ++b) {
      double v = proto[b];
      if (config.noise_sigma > 0.0) v += config.noise_sigma * rng.normal();
      dst[b] = static_cast<float>(v);
    }
  }
  return scene;
}

}  // namespace specmask

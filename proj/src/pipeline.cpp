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

#include "specmask/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "specmask/binary_io.hpp"
#include "specmask/cnn_io.hpp"
#include "specmask/errors.hpp"

namespace specmask {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void check_width(const Classifier& c, std::size_t cols) {
  if (cols != input_length(c)) {
    throw InvalidArgument("model expects " + std::to_string(input_length(c)) + " features, got " +
                          std::to_string(cols));
  }
}

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::uint32_t read_header_number(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (is_space(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  std::uint64_t v = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    v = v * 10 + (bytes[pos] - '0');
    if (v > 0xFFFFFFFFu) throw FormatError("graymap header number too large", start);
    ++pos;
  }
  if (pos == start) throw FormatError("expected a number in graymap header", start);
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Classifier load_classifier(const std::filesystem::path& path) {
  const auto magic = peek_magic(path);
  if (magic == "GBT1") return read_ensemble(path);
  if (magic == "SCNN") {
    auto m = deserialize(path);
    return std::visit([](auto&& v) -> Classifier { return std::move(v); }, std::move(m));
  }
  if (!std::filesystem::exists(path)) throw IoError("cannot open model file: " + path.string());
  throw FormatError("unrecognised model file " + path.string(), 0);
}

std::size_t input_length(const Classifier& classifier) {
  return std::visit(Overloaded{
                        [](const SpectralCnn& m) { return m.input_length; },
                        [](const ReducedModel& m) { return m.projector.input_dim; },
                        [](const BoostedEnsemble& e) { return e.feature_count; },
                    },
                    classifier);
}

std::string classifier_kind(const Classifier& classifier) {
  return std::visit(Overloaded{
                        [](const SpectralCnn&) { return std::string("cnn"); },
                        [](const ReducedModel& m) { return "reduced-d" + std::to_string(m.projector.components); },
                        [](const BoostedEnsemble& e) { return std::string("gbt-") + policy_name(e.policy); },
                    },
                    classifier);
}

void classify_rows(const Classifier& classifier, const Matrix& rows, MatrixD& probs) {
  check_width(classifier, rows.cols());
  std::visit(Overloaded{
                 [&](const SpectralCnn& m) { forward_batch(m, rows, probs); },
                 [&](const ReducedModel& m) {
                   probs = MatrixD(rows.rows(), kClassCount);
                   for (std::size_t i = 0; i < rows.rows(); ++i) {
                     const auto p = forward(m, rows.row(i));
                     std::copy(p.begin(), p.end(), probs.row(i).begin());
                   }
                 },
                 [&](const BoostedEnsemble& e) { predict_batch(e, rows, probs); },
             },
             classifier);
}

double cloud_fraction(std::span<const std::uint8_t> classes) {
  if (classes.empty()) return 0.0;
  const auto clouds = std::count(classes.begin(), classes.end(), static_cast<std::uint8_t>(PixelClass::kCloud));
  return static_cast<double>(clouds) / static_cast<double>(classes.size());
}

MaskResult classify_cube(const Classifier& classifier, const SpectralCube& cube, const NormStats* norm) {
  Matrix rows = exclude_bands(cube);
  if (norm) {
    if (norm->feature_count != rows.cols()) {
      throw InvalidArgument("norm statistics cover " + std::to_string(norm->feature_count) +
                            " features, cube has " + std::to_string(rows.cols()));
    }
    for (std::size_t i = 0; i < rows.rows(); ++i) apply_zscore_inplace(rows.row(i), *norm);
  }
  MatrixD probs;
  classify_rows(classifier, rows, probs);
  MaskResult m;
  m.height = cube.height;
  m.width = cube.width;
  m.classes.resize(rows.rows());
  m.confidence.resize(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto p = probs.row(i);
    const auto best = std::max_element(p.begin(), p.end());
    m.classes[i] = static_cast<std::uint8_t>(best - p.begin());
    m.confidence[i] = static_cast<float>(*best);
  }
  m.cloud_fraction = cloud_fraction(m.classes);
  return m;
}

MaskResult mask_from_labels(const LabelMap& labels) {
  labels.validate();
  MaskResult m;
  m.height = labels.height;
  m.width = labels.width;
  m.classes = labels.labels;
  m.confidence.assign(m.classes.size(), 1.0f);
  m.cloud_fraction = cloud_fraction(m.classes);
  return m;
}

std::vector<std::uint8_t> encode_pgm(const Graymap& image) {
  if (image.maxval == 0 || image.maxval > 255) throw InvalidArgument("graymap maxval must lie in 1..255");
  if (image.pixels.size() != std::size_t{image.width} * image.height) {
    throw InvalidArgument("graymap pixel count does not match its size");
  }
  const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n" + std::to_string(image.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

Graymap decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("not a P5 graymap", 0);
  std::size_t pos = 2;
  Graymap g;
  g.width = read_header_number(bytes, pos);
  g.height = read_header_number(bytes, pos);
  const std::size_t maxval_at = pos;
  const auto maxval = read_header_number(bytes, pos);
  if (maxval == 0 || maxval > 255) throw FormatError("unsupported graymap maxval", maxval_at);
  g.maxval = static_cast<std::uint16_t>(maxval);
  if (pos >= bytes.size() || !is_space(bytes[pos])) throw FormatError("missing graymap header terminator", pos);
  ++pos;
  const std::uint64_t count = std::uint64_t{g.width} * g.height;
  if (bytes.size() - pos != count) throw FormatError("graymap payload size mismatch", pos);
  g.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    if (g.pixels[i] > g.maxval) throw FormatError("graymap pixel above maxval", pos + i);
  }
  return g;
}

Graymap read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

MaskFiles export_mask(const MaskResult& mask, const std::filesystem::path& basepath) {
  const std::size_t n = std::size_t{mask.height} * mask.width;
  if (mask.classes.size() != n || mask.confidence.size() != n) {
    throw InvalidArgument("mask arrays do not match its size");
  }
  Graymap classes{mask.width, mask.height, 2, mask.classes};
  for (auto c : classes.pixels) {
    if (c >= kClassCount) throw InvalidArgument("mask class out of range");
  }
  Graymap conf{mask.width, mask.height, 255, std::vector<std::uint8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::clamp(static_cast<double>(mask.confidence[i]), 0.0, 1.0);
    conf.pixels[i] = static_cast<std::uint8_t>(std::lround(c * 255.0));
  }
  MaskFiles files;
  files.classes = basepath;
  files.classes += ".classes.pgm";
  files.confidence = basepath;
  files.confidence += ".confidence.pgm";
  write_file(files.classes, encode_pgm(classes));
  write_file(files.confidence, encode_pgm(conf));
  return files;
}

DownlinkDecision decide_downlink(double fraction, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("cloud fraction must lie in [0, 1]");
  return {fraction < threshold, fraction, threshold};
}

DownlinkDecision decide_downlink(const MaskResult& mask, double threshold) {
  return decide_downlink(mask.cloud_fraction, threshold);
}

TimingReport run_benchmark(const Classifier& classifier, const SpectralCube& cube, std::size_t repetitions,
                           const NormStats* norm) {
  if (repetitions == 0) throw InvalidArgument("repetitions must be positive");
  cube.validate();
  check_width(classifier, cube.valid_band_count());
  TimingReport r;
  r.model = classifier_kind(classifier);
  r.pixels_per_image = cube.pixel_count();
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto mask = classify_cube(classifier, cube, norm);
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    r.image_seconds.push_back(std::max(s, 1e-9));
    (void)mask;
  }
  r.first_image = r.image_seconds.front();
  std::vector<double> rest(r.image_seconds.begin() + (repetitions > 1 ? 1 : 0), r.image_seconds.end());
  double sum = 0.0;
  for (double v : rest) sum += v;
  r.rest_mean = sum / static_cast<double>(rest.size());
  std::sort(rest.begin(), rest.end());
  const std::size_t m = rest.size();
  r.rest_median = m % 2 ? rest[m / 2] : 0.5 * (rest[m / 2 - 1] + rest[m / 2]);
  r.pixels_per_second = static_cast<double>(r.pixels_per_image) / r.rest_median;
  return r;
}

}  // namespace specmask

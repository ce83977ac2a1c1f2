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

#include "specmask/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specmask/errors.hpp"

namespace specmask {

void PcaProjector::validate() const {
  if (input_dim == 0 || components == 0 || components > input_dim) {
    throw InvalidData("projector dimensions must satisfy 1 <= d <= D");
  }
  if (mean.size() != input_dim || basis.rows() != input_dim || basis.cols() != components) {
    throw InvalidData("projector arrays do not match its dimensions");
  }
  require_finite(mean, "projector mean");
  require_finite(basis.data(), "projector basis");
}

PcaProjector fit_pca(const Matrix& train_features, std::size_t d) {
  const std::size_t n = train_features.rows();
  const std::size_t dim = train_features.cols();
  if (n < 2) throw InvalidArgument("fit_pca needs at least two rows");
  if (d < 1 || d > dim) {
    throw InvalidArgument("fit_pca: component count " + std::to_string(d) + " outside [1, " +
                          std::to_string(dim) + "]");
  }
  require_finite(train_features.data(), "fit_pca");

  std::vector<double> mean(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = train_features.row(r);
    for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  MatrixD cov(dim, dim);
  std::vector<double> centered(dim);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = train_features.row(r);
    for (std::size_t j = 0; j < dim; ++j) centered[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < dim; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      auto cov_row = cov.row(i);
      for (std::size_t j = i; j < dim; ++j) cov_row[j] += ci * centered[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov(i, j) /= static_cast<double>(n);
      cov(j, i) = cov(i, j);
    }
  }

  const EigResult eig = sym_eig_descending(cov);
  double sum = 0.0;
  for (double v : eig.eigenvalues) sum += std::max(v, 0.0);

  PcaProjector p;
  p.input_dim = dim;
  p.components = d;
  p.mean.assign(mean.begin(), mean.end());
  p.basis = Matrix(dim, d);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t k = 0; k < d; ++k) p.basis(j, k) = static_cast<float>(eig.eigenvectors(j, k));
  p.spectrum.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    p.spectrum[k] = sum > 0.0 ? std::max(eig.eigenvalues[k], 0.0) / sum : (k == 0 ? 1.0 : 0.0);
  }
  p.explained.assign(p.spectrum.begin(), p.spectrum.begin() + static_cast<std::ptrdiff_t>(d));
  return p;
}

PcaProjector fit_pca(const PixelDataset& dataset, std::size_t d) {
  return fit_pca(dataset.subset(Split::kTrain).features, d);
}

std::vector<std::size_t> explained_variance_report(const PcaProjector& projector,
                                                   std::span<const double> thresholds) {
  std::vector<std::size_t> out;
  for (double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("explained-variance threshold must lie in (0, 1]");
    double cum = 0.0;
    std::size_t k = projector.spectrum.size();
    for (std::size_t i = 0; i < projector.spectrum.size(); ++i) {
      cum += projector.spectrum[i];
      if (cum >= t - 1e-12) {
        k = i + 1;
        break;
      }
    }
    out.push_back(k);
  }
  return out;
}

std::vector<float> project(const PcaProjector& projector, std::span<const float> pixel) {
  if (pixel.size() != projector.input_dim) {
    throw InvalidArgument("project: pixel has " + std::to_string(pixel.size()) +
                          " features, projector expects " + std::to_string(projector.input_dim));
  }
  thread_local std::vector<double> x, y;
  x.assign(pixel.begin(), pixel.end());
  y.resize(projector.components);
  project_into<double>(projector, x, y);
  return std::vector<float>(y.begin(), y.end());
}

Matrix project_rows(const PcaProjector& projector, const Matrix& rows) {
  Matrix out(rows.rows(), projector.components);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto p = project(projector, rows.row(r));
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

PixelDataset project_dataset(const PcaProjector& projector, const PixelDataset& dataset) {
  PixelDataset out;
  out.features = project_rows(projector, dataset.features);
  out.labels = dataset.labels;
  out.split = dataset.split;
  out.feature_count = projector.components;
  return out;
}

ReducedParamCount count_params(const ReducedModel& model) {
  ReducedParamCount c;
  c.trainable = count_params(model.head).trainable;
  c.total = c.trainable + model.projector.input_dim * model.projector.components;
  c.frozen_mean = model.projector.input_dim;
  c.bytes_at_4b = (c.total + c.frozen_mean) * 4;
  return c;
}

ReducedModel build_reduced_model(const PcaProjector& projector, const HeadOptions& options) {
  if (projector.components < 1) throw InvalidArgument("reduced model needs d >= 1");
  projector.validate();
  ReducedModel m;
  m.projector = projector;
  m.head = build_conv_head(projector.components, kClassCount, options);
  return m;
}

std::vector<double> forward(const ReducedModel& model, std::span<const float> pixel) {
  return forward(model.head, project(model.projector, pixel));
}

std::size_t predict(const ReducedModel& model, std::span<const float> pixel) {
  return predict(model.head, project(model.projector, pixel));
}

double accuracy(const ReducedModel& model, const PixelDataset& dataset, Split split) {
  return accuracy(model.head, project_dataset(model.projector, dataset.subset(split)), split);
}

ReducedTrainResult train(ReducedModel model, const PixelDataset& dataset, const TrainConfig& config) {
  if (dataset.feature_count != model.projector.input_dim) {
    throw InvalidArgument("train: dataset width does not match projector input");
  }
  PixelDataset projected = project_dataset(model.projector, dataset);
  TrainResult r = train(std::move(model.head), projected, config);
  ReducedTrainResult out;
  out.model.projector = std::move(model.projector);
  out.model.head = std::move(r.model);
  out.history = std::move(r.history);
  return out;
}

}  // namespace specmask

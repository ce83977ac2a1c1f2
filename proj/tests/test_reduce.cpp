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

#include "specmask/cnn_io.hpp"
#include "specmask/reduce.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace specmask {
namespace {

using oracle::planted_rows;

TEST(Pca, SingleAxisData) {
  Matrix rows(10, 2);
  for (std::size_t i = 0; i < 10; ++i) rows(i, 0) = static_cast<float>(i);
  const auto p = fit_pca(rows, 1);
  EXPECT_NEAR(std::abs(p.basis(0, 0)), 1.0, 1e-9);
  EXPECT_NEAR(p.basis(1, 0), 0.0, 1e-9);
  ASSERT_EQ(p.explained.size(), 1u);
  EXPECT_NEAR(p.explained[0], 1.0, 1e-12);
  const double t[] = {0.999};
  EXPECT_EQ(explained_variance_report(p, t)[0], 1u);
}

TEST(Pca, FullDimensionReconstructsTrainRows) {
  const Matrix rows = testing::random_matrix(50, 9, 3);
  const auto p = fit_pca(rows, 9);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto z = project(p, rows.row(i));
    for (std::size_t j = 0; j < 9; ++j) {
      double back = p.mean[j];
      for (std::size_t k = 0; k < 9; ++k) back += double(p.basis(j, k)) * z[k];
      EXPECT_NEAR(back, rows(i, j), 1e-4);
    }
  }
}

TEST(Pca, BasisOrthonormalAndExplainedDescending) {
  const auto p = fit_pca(testing::random_matrix(80, 12, 4), 6);
  const MatrixD b = to_double(p.basis);
  EXPECT_LT(frobenius_distance(matmul(b.transposed(), b), MatrixD::identity(6)), 1e-4);
  double cum = 0;
  for (std::size_t k = 0; k < 6; ++k) {
    if (k) EXPECT_GE(p.explained[k - 1], p.explained[k]);
    cum += p.explained[k];
  }
  EXPECT_LE(cum, 1.0 + 1e-6);
}

TEST(Pca, PlantedSpectrumReport) {
  const Matrix rows = planted_rows({0.7, 0.2, 0.1}, 6, 400, 5);
  const auto p = fit_pca(rows, 3);
  EXPECT_NEAR(p.explained[0], 0.7, 1e-6);
  EXPECT_NEAR(p.explained[1], 0.2, 1e-6);
  EXPECT_NEAR(p.explained[2], 0.1, 1e-6);
  const double t[] = {0.5, 0.85, 0.95, 1.0};
  EXPECT_EQ(explained_variance_report(p, t), (std::vector<std::size_t>{1, 2, 3, 3}));
}

TEST(Pca, CapturedVarianceMatchesEigenvalueSums) {
  const std::vector<double> lambda = {4.0, 2.0, 1.0, 0.5, 0.25};
  const Matrix rows = planted_rows(lambda, 8, 300, 6);
  double total = 0;
  for (double l : lambda) total += l;
  for (std::size_t d = 1; d <= 5; ++d) {
    const auto p = fit_pca(rows, d);
    const Matrix z = project_rows(p, rows);
    double captured = 0;
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0;
      for (std::size_t i = 0; i < z.rows(); ++i) s += double(z(i, k)) * z(i, k);
      captured += s / double(z.rows());
    }
    double expect = 0;
    for (std::size_t k = 0; k < d; ++k) expect += lambda[k];
    EXPECT_NEAR(captured / total, expect / total, 1e-6) << "d=" << d;
  }
}

TEST(Pca, HandDatasetMatchesCubicOracle) {
  const Matrix rows{{2, 0, 1}, {0, 1, 3}, {1, 1, 0}, {4, 2, 2}, {3, 0, 4}};
  const auto p = fit_pca(rows, 3);
  // population covariance of the rows above
  MatrixD c(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double mi = 0, mj = 0;
      for (int r = 0; r < 5; ++r) {
        mi += rows(r, i);
        mj += rows(r, j);
      }
      mi /= 5;
      mj /= 5;
      double s = 0;
      for (int r = 0; r < 5; ++r) s += (rows(r, i) - mi) * (rows(r, j) - mj);
      c(i, j) = s / 5;
    }
  const double q = (c(0, 0) + c(1, 1) + c(2, 2)) / 3;
  const double p1 = c(0, 1) * c(0, 1) + c(0, 2) * c(0, 2) + c(1, 2) * c(1, 2);
  const double p2 = (c(0, 0) - q) * (c(0, 0) - q) + (c(1, 1) - q) * (c(1, 1) - q) + (c(2, 2) - q) * (c(2, 2) - q) + 2 * p1;
  const double pp = std::sqrt(p2 / 6);
  MatrixD b(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (c(i, j) - (i == j ? q : 0)) / pp;
  const double det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                     b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double phi = std::acos(std::clamp(det / 2, -1.0, 1.0)) / 3;
  const double l1 = q + 2 * pp * std::cos(phi);
  const double l3 = q + 2 * pp * std::cos(phi + 2 * M_PI / 3);
  const double l2 = 3 * q - l1 - l3;
  const double sum = l1 + l2 + l3;
  EXPECT_NEAR(p.spectrum[0], l1 / sum, 1e-6);
  EXPECT_NEAR(p.spectrum[1], l2 / sum, 1e-6);
  EXPECT_NEAR(p.spectrum[2], l3 / sum, 1e-6);
  // each basis column is an eigenvector: C v = lambda v
  const double lam[] = {l1, l2, l3};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) {
      double cv = 0;
      for (int j = 0; j < 3; ++j) cv += c(i, j) * p.basis(j, k);
      EXPECT_NEAR(cv, lam[k] * p.basis(i, k), 1e-5);
    }
}

TEST(Pca, RejectsBadDimensions) {
  const Matrix rows = testing::random_matrix(10, 4, 1);
  EXPECT_THROW(fit_pca(rows, 5), InvalidArgument);
  EXPECT_THROW(fit_pca(rows, 0), InvalidArgument);
  EXPECT_THROW(fit_pca(Matrix(1, 4), 2), InvalidArgument);
}

PcaProjector fitted(std::size_t d) {
  return fit_pca(testing::random_matrix(300, 112, 9), d);
}

TEST(ReducedModel, HeadCounts) {
  HeadOptions bias_free;
  bias_free.bias_free_affine = true;
  const std::size_t expect_trainable[] = {597, 525, 63};
  const std::size_t expect_total[] = {597 + 112 * 30, 2541, 847};
  const std::size_t dims[] = {30, 18, 7};
  std::size_t prev = 4563 + 1;
  for (int i = 0; i < 3; ++i) {
    const auto m = build_reduced_model(fitted(dims[i]));
    const auto c = count_params(m);
    EXPECT_EQ(c.trainable, expect_trainable[i]) << "d=" << dims[i];
    EXPECT_EQ(c.total, expect_total[i]) << "d=" << dims[i];
    EXPECT_EQ(c.frozen_mean, 112u);
    EXPECT_LT(c.trainable, prev);
    prev = c.trainable;
  }
  const auto f04 = count_params(build_reduced_model(fitted(4), bias_free));
  EXPECT_EQ(f04.trainable, 12u);
  EXPECT_EQ(f04.total, 12u + 448);
  EXPECT_LT(f04.trainable, prev);
  EXPECT_EQ(count_params(build_reduced_model(fitted(112))).trainable, 4563u);
}

TEST(ReducedModel, PredictionEqualsHeadOnProjection) {
  const auto m = build_reduced_model(fitted(18));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<float> px(112);
    for (auto& v : px) v = static_cast<float>(rng.normal());
    EXPECT_EQ(forward(m, px), forward(m.head, project(m.projector, px)));
  }
}

TEST(ReducedModel, TrainingKeepsProjectorFrozenAndFourComponentHeadLearns) {
  const PixelDataset ds = testing::separable_dataset(4, 1, 1);
  const auto p = fit_pca(ds, 4);
  HeadOptions o;
  o.bias_free_affine = true;
  o.seed = 2;
  const auto m = build_reduced_model(p, o);
  TrainConfig cfg;
  cfg.seed = 1;
  const auto r = train(m, ds, cfg);
  EXPECT_EQ(r.model.projector.basis, p.basis);
  EXPECT_EQ(r.model.projector.mean, p.mean);
  EXPECT_GE(accuracy(r.model, ds, Split::kTest), 0.95);
}

TEST(ReducedModel, SerializationKeepsProjector) {
  const auto m = build_reduced_model(fitted(7));
  const auto back = std::get<ReducedModel>(decode_model(encode_model(m)));
  EXPECT_EQ(back.projector.basis, m.projector.basis);
  EXPECT_EQ(back.projector.mean, m.projector.mean);
  EXPECT_EQ(flatten_params(back.head), flatten_params(m.head));
  const auto proj = decode_projector(encode_projector(m.projector));
  EXPECT_EQ(proj.basis, m.projector.basis);
  EXPECT_EQ(proj.spectrum, m.projector.spectrum);
}

}  // namespace
}  // namespace specmask

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

#include "specmask/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace specmask {

MatrixD to_double(const Matrix& m) {
  MatrixD out(m.rows(), m.cols());
  std::copy(m.data().begin(), m.data().end(), out.data().begin());
  return out;
}

Matrix to_float(const MatrixD& m) {
  Matrix out(m.rows(), m.cols());
  std::transform(m.data().begin(), m.data().end(), out.data().begin(),
                 [](double v) { return static_cast<float>(v); });
  return out;
}

namespace {

template <typename T>
BasicMatrix<T> matmul_impl(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimensions differ");
  BasicMatrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

// A^T A accumulated in double.
MatrixD gram(const MatrixD& a) {
  const std::size_t n = a.cols();
  MatrixD g(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      for (std::size_t j = i; j < n; ++j) g(i, j) += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

double column_dot(const MatrixD& a, std::size_t i, const MatrixD& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b(r, j);
  return s;
}

// Modified Gram-Schmidt over the first `count` columns of q. Columns whose
// residual norm collapses are replaced by the first standard basis vector
// that is still linearly independent of the preceding columns.
void orthonormalize_columns(MatrixD& q, std::size_t count, std::span<const char> usable) {
  const std::size_t m = q.rows();
  std::size_t next_basis = 0;
  for (std::size_t j = 0; j < count; ++j) {
    bool filled = usable[j] != 0;
    for (int attempt = 0; attempt < 2 && filled; ++attempt) {
      for (std::size_t k = 0; k < j; ++k) {
        const double d = column_dot(q, k, q, j);
        for (std::size_t r = 0; r < m; ++r) q(r, j) -= d * q(r, k);
      }
    }
    if (filled) {
      double norm = std::sqrt(column_dot(q, j, q, j));
      if (norm > 1e-10) {
        for (std::size_t r = 0; r < m; ++r) q(r, j) /= norm;
      } else {
        filled = false;
      }
    }
    while (!filled && next_basis < m) {
      for (std::size_t r = 0; r < m; ++r) q(r, j) = (r == next_basis) ? 1.0 : 0.0;
      ++next_basis;
      for (int attempt = 0; attempt < 2; ++attempt) {
        for (std::size_t k = 0; k < j; ++k) {
          const double d = column_dot(q, k, q, j);
          for (std::size_t r = 0; r < m; ++r) q(r, j) -= d * q(r, k);
        }
      }
      const double norm = std::sqrt(column_dot(q, j, q, j));
      if (norm > 1e-6) {
        for (std::size_t r = 0; r < m; ++r) q(r, j) /= norm;
        filled = true;
      }
    }
  }
}

}  // namespace

MatrixD matmul(const MatrixD& a, const MatrixD& b) { return matmul_impl(a, b); }
Matrix matmul(const Matrix& a, const Matrix& b) { return matmul_impl(a, b); }

double frobenius_norm(const MatrixD& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_distance(const MatrixD& a, const MatrixD& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("frobenius_distance: shape mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) throw InvalidData(std::string(what) + ": non-finite entry");
  }
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidData(std::string(what) + ": non-finite entry");
  }
}

MatrixD SvdResult::reconstruct() const {
  const std::size_t m = left_factors.rows();
  const std::size_t n = right_factors.rows();
  MatrixD out(m, n);
  for (std::size_t k = 0; k < rank; ++k) {
    const double s = singular_values[k];
    for (std::size_t i = 0; i < m; ++i) {
      const double us = s * left_factors(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += us * right_factors(j, k);
    }
  }
  return out;
}

EigResult sym_eig_descending(const MatrixD& c) {
  const std::size_t d = c.rows();
  if (d == 0 || c.cols() != d) throw InvalidArgument("sym_eig_descending: expected a square matrix");
  require_finite(c.data(), "sym_eig_descending");

  double scale = 0.0;
  for (double v : c.data()) scale = std::max(scale, std::abs(v));
  const double sym_tol = 1e-5 * std::max(1.0, scale);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::abs(c(i, j) - c(j, i)) > sym_tol) {
        throw InvalidData("sym_eig_descending: matrix is not symmetric");
      }

  MatrixD a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = 0.5 * (c(i, j) + c(j, i));
  MatrixD v = MatrixD::identity(d);

  const double threshold = 1e-10 * std::max(frobenius_norm(a), 1e-300);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= threshold) break;

    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigResult out;
  out.eigenvalues.resize(d);
  out.eigenvectors = MatrixD(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t r = 0; r < d; ++r) {
      if (std::abs(v(r, src)) > 1e-12) {
        sign = v(r, src) < 0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < d; ++r) out.eigenvectors(r, k) = sign * v(r, src);
  }
  return out;
}

SvdResult truncated_svd(const Matrix& m, std::size_t r) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (r < 1 || r > std::min(rows, cols)) {
    throw InvalidArgument("truncated_svd: rank " + std::to_string(r) + " outside [1, " +
                          std::to_string(std::min(rows, cols)) + "]");
  }
  require_finite(m.data(), "truncated_svd");

  // Work on the orientation whose Gram matrix is the smaller one.
  const bool transpose = rows < cols;
  const MatrixD a = transpose ? to_double(m).transposed() : to_double(m);
  const std::size_t tall = a.rows();
  const std::size_t small = a.cols();

  const EigResult eig = sym_eig_descending(gram(a));

  std::vector<double> sigma(r);
  for (std::size_t k = 0; k < r; ++k) sigma[k] = std::sqrt(std::max(eig.eigenvalues[k], 0.0));
  const double cutoff = (sigma.empty() ? 0.0 : sigma[0]) * 1e-7 * static_cast<double>(tall);

  // Columns of the long side: a * v_k / sigma_k.
  MatrixD long_side(tall, r);
  std::vector<char> usable_raw(r);
  for (std::size_t k = 0; k < r; ++k) {
    usable_raw[k] = sigma[k] > cutoff && sigma[k] > 0.0;
    if (!usable_raw[k]) continue;
    for (std::size_t i = 0; i < tall; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < small; ++j) s += a(i, j) * eig.eigenvectors(j, k);
      long_side(i, k) = s / sigma[k];
    }
  }
  orthonormalize_columns(long_side, r, usable_raw);

  MatrixD short_side(small, r);
  for (std::size_t i = 0; i < small; ++i)
    for (std::size_t k = 0; k < r; ++k) short_side(i, k) = eig.eigenvectors(i, k);

  SvdResult out;
  out.rank = r;
  out.singular_values = sigma;
  for (std::size_t k = 0; k < r; ++k) {
    if (!usable_raw[k]) out.singular_values[k] = 0.0;
  }
  if (transpose) {
    out.left_factors = to_float(short_side);
    out.right_factors = to_float(long_side);
  } else {
    out.left_factors = to_float(long_side);
    out.right_factors = to_float(short_side);
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next());
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace specmask

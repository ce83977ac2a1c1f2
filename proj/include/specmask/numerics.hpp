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

// Dense small-matrix linear algebra used by layer compression and PCA, plus
// the deterministic random source shared by every seeded component.

#ifndef SPECMASK_NUMERICS_HPP_
#define SPECMASK_NUMERICS_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "specmask/errors.hpp"

namespace specmask {

// Row-major dense matrix.
template <typename T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw InvalidArgument("matrix data length does not match rows*cols");
    }
  }
  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw InvalidArgument("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  BasicMatrix transposed() const {
    BasicMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  bool operator==(const BasicMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<float>;
using MatrixD = BasicMatrix<double>;

MatrixD to_double(const Matrix& m);
Matrix to_float(const MatrixD& m);

MatrixD matmul(const MatrixD& a, const MatrixD& b);
Matrix matmul(const Matrix& a, const Matrix& b);

double frobenius_norm(const MatrixD& m);
double frobenius_distance(const MatrixD& a, const MatrixD& b);

// Throws InvalidData if any entry is NaN or infinite.
void require_finite(std::span<const float> values, const char* what);
void require_finite(std::span<const double> values, const char* what);

struct SvdResult {
  Matrix left_factors;                  // m x r, orthonormal columns
  std::vector<double> singular_values;  // r, descending, >= 0
  Matrix right_factors;                 // n x r, orthonormal columns
  std::size_t rank = 0;

  // U * diag(S) * V^T.
  MatrixD reconstruct() const;
};

struct EigResult {
  std::vector<double> eigenvalues;  // descending
  MatrixD eigenvectors;             // columns are unit eigenvectors
};

// Best rank-r factorization of m. Computed from the eigendecomposition of the
// Gram matrix of the smaller side followed by one Gram-Schmidt pass.
SvdResult truncated_svd(const Matrix& m, std::size_t r);

// Cyclic Jacobi eigensolver for symmetric matrices. Eigenvalue ties keep the
// input column order; each eigenvector's first nonzero entry is positive.
EigResult sym_eig_descending(const MatrixD& c);
inline EigResult sym_eig_descending(const Matrix& c) { return sym_eig_descending(to_double(c)); }

// splitmix64-seeded xoshiro256**. Distribution helpers are implemented here
// rather than via <random> distributions so streams match across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace specmask

#endif  // SPECMASK_NUMERICS_HPP_

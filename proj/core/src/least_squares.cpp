// Copyright 2026 The rnnpress Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <string>

#include "rnnpress/errors.hpp"
#include "rnnpress/linalg.hpp"

namespace rnnpress {
namespace {

constexpr double kOrthonormalTolerance = 1e-8;
constexpr double kConditionFloor = 1e-12;

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& g) {
  const std::size_t n = g.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = g(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw SingularityError("least squares: Gram matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Solves (L L^T) x = b in place.
void cholesky_solve(const Matrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * b[k];
    b[i] = s / l(i, i);
  }
}

}  // namespace

Matrix least_squares_rowspace(const Matrix& p, const Matrix& w) {
  const std::size_t r = p.rows();
  if (r == 0 || p.cols() == 0) throw ArgumentError("least squares: empty projection");
  if (r > p.cols()) {
    throw ArgumentError("least squares: projection has more rows (" + std::to_string(r) +
                        ") than columns (" + std::to_string(p.cols()) + ")");
  }
  if (w.cols() != p.cols()) {
    throw ArgumentError("least squares: target has " + std::to_string(w.cols()) +
                        " columns, projection has " + std::to_string(p.cols()));
  }

  const Matrix gram = matmul_transposed(p, p);
  Matrix rhs = matmul_transposed(w, p);
  if (frobenius_distance(gram, Matrix::identity(r)) <=
      kOrthonormalTolerance * static_cast<double>(r)) {
    return rhs;
  }

  // Gram is symmetric PSD, so its singular values are its eigenvalues.
  const SvdResult spectrum = svd(gram);
  if (spectrum.sigma.back() <= kConditionFloor * spectrum.sigma.front()) {
    throw SingularityError("least squares: projection Gram matrix is singular (eigenvalue ratio " +
                           std::to_string(spectrum.sigma.back() / spectrum.sigma.front()) + ")");
  }
  const Matrix l = cholesky(gram);
  for (std::size_t i = 0; i < rhs.rows(); ++i) cholesky_solve(l, rhs.row(i));
  return rhs;
}

}  // namespace rnnpress

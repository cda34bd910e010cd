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

#pragma once

#include <cstddef>
#include <span>

#include "rnnpress/matrix.hpp"

namespace rnnpress {

/// Thin SVD a = u * diag(sigma) * v^T with k = min(rows, cols).
///
/// Guarantees: sigma is non-increasing and non-negative, u and v have
/// orthonormal columns, and each (u, v) column pair is sign-normalized so the
/// largest-magnitude entry of the u column is non-negative (lowest row index
/// wins ties). Singular values below 1e-12 * sigma[0] are clamped to zero.
struct SvdResult {
  Matrix u;
  Vector sigma;
  Matrix v;
};

/// Rank-r factors of a truncated SVD: left = U_r * Sigma_r, proj = V_r^T.
struct LowRankFactors {
  Matrix left;
  Matrix proj;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix subtract(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
/// Accumulates a * x into y.
void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> y);
double frobenius_norm(const Matrix& a);
double frobenius_distance(const Matrix& a, const Matrix& b);

/// Sweep cap for the Jacobi iteration; exceeding it throws NumericalError.
inline constexpr int kSvdMaxSweeps = 75;
/// Relative threshold under which singular values are clamped to zero.
inline constexpr double kSingularValueClamp = 1e-12;

SvdResult svd(const Matrix& a);

/// Throws ArgumentError unless 1 <= r <= sigma.size().
LowRankFactors truncate(const SvdResult& svd, std::size_t r);

/// Solves min_Z ||Z * p - w||_F for p (r x n, r <= n) and w (m x n).
///
/// When p has orthonormal rows (||p p^T - I||_F <= 1e-8 * r) the answer is
/// w * p^T. Otherwise the normal equations Z (p p^T) = w p^T are solved by
/// Cholesky, after rejecting Gram matrices whose eigenvalue ratio
/// min/max is at or below 1e-12 with SingularityError.
Matrix least_squares_rowspace(const Matrix& p, const Matrix& w);

}  // namespace rnnpress

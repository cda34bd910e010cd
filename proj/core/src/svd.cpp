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

// Thin SVD by Householder QR followed by one-sided (Hestenes) Jacobi.
//
// Tall inputs are first reduced to their n x n triangular factor so the
// Jacobi sweeps run on the small matrix; wide inputs are handled through the
// transpose. All working buffers are column-major so that the column pairs
// the Jacobi rotations touch are contiguous.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rnnpress/errors.hpp"
#include "rnnpress/linalg.hpp"

namespace rnnpress {
namespace {

// Column-major p x q buffer.
struct ColumnMajor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ColumnMajor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }
};

double dot(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < n; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

// Squared norms of x and y plus their inner product in one pass.
void gram_entries(const double* x, const double* y, std::size_t n, double* xx, double* yy,
                  double* xy) {
  double a0 = 0.0, a1 = 0.0, b0 = 0.0, b1 = 0.0, g0 = 0.0, g1 = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    a0 += x[i] * x[i];
    a1 += x[i + 1] * x[i + 1];
    b0 += y[i] * y[i];
    b1 += y[i + 1] * y[i + 1];
    g0 += x[i] * y[i];
    g1 += x[i + 1] * y[i + 1];
  }
  if (i < n) {
    a0 += x[i] * x[i];
    b0 += y[i] * y[i];
    g0 += x[i] * y[i];
  }
  *xx = a0 + a1;
  *yy = b0 + b1;
  *xy = g0 + g1;
}

// Householder QR of a tall matrix; returns the thin Q (p x q) and overwrites
// `a` so that its leading q x q block is R.
ColumnMajor householder_qr(ColumnMajor& a) {
  const std::size_t p = a.rows;
  const std::size_t q = a.cols;
  std::vector<std::vector<double>> reflectors(q);
  std::vector<double> betas(q, 0.0);

  for (std::size_t j = 0; j < q; ++j) {
    double* x = a.col(j) + j;
    const std::size_t len = p - j;
    const double norm = std::sqrt(dot(x, x, len));
    if (norm == 0.0) continue;
    const double alpha = x[0] >= 0.0 ? -norm : norm;
    std::vector<double> v(x, x + len);
    v[0] -= alpha;
    const double vv = dot(v.data(), v.data(), len);
    if (vv == 0.0) continue;
    const double beta = 2.0 / vv;
    for (std::size_t c = j; c < q; ++c) {
      double* y = a.col(c) + j;
      const double s = beta * dot(v.data(), y, len);
      for (std::size_t i = 0; i < len; ++i) y[i] -= s * v[i];
    }
    // Exact zeros below the diagonal.
    x[0] = alpha;
    std::fill(x + 1, x + len, 0.0);
    reflectors[j] = std::move(v);
    betas[j] = beta;
  }

  ColumnMajor qmat(p, q);
  for (std::size_t c = 0; c < q; ++c) qmat.col(c)[c] = 1.0;
  for (std::size_t jj = q; jj-- > 0;) {
    if (betas[jj] == 0.0) continue;
    const auto& v = reflectors[jj];
    const std::size_t len = p - jj;
    for (std::size_t c = jj; c < q; ++c) {
      double* y = qmat.col(c) + jj;
      const double s = betas[jj] * dot(v.data(), y, len);
      for (std::size_t i = 0; i < len; ++i) y[i] -= s * v[i];
    }
  }
  return qmat;
}

// Cyclic one-sided Jacobi on a (p x q, p >= q). On return the columns of `a`
// are mutually orthogonal and `v` (q x q) holds the accumulated rotations.
void one_sided_jacobi(ColumnMajor& a, ColumnMajor& v) {
  const std::size_t p = a.rows;
  const std::size_t q = a.cols;
  const double tol =
      std::max(1.0, std::sqrt(static_cast<double>(p))) * std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < kSvdMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t j = 0; j + 1 < q; ++j) {
      for (std::size_t k = j + 1; k < q; ++k) {
        double* cj = a.col(j);
        double* ck = a.col(k);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        gram_entries(cj, ck, p, &alpha, &beta, &gamma);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        for (std::size_t i = 0; i < p; ++i) {
          const double x = cj[i];
          const double y = ck[i];
          cj[i] = c * x - s * y;
          ck[i] = s * x + c * y;
        }
        double* vj = v.col(j);
        double* vk = v.col(k);
        for (std::size_t i = 0; i < q; ++i) {
          const double x = vj[i];
          const double y = vk[i];
          vj[i] = c * x - s * y;
          vk[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericalError("svd: Jacobi iteration did not converge within " +
                       std::to_string(kSvdMaxSweeps) + " sweeps");
}

// Next unit vector orthogonal to the first `filled` columns of u, chosen from
// the standard basis starting at `*next`.
void complete_column(ColumnMajor& u, std::size_t filled, std::size_t* next) {
  const std::size_t p = u.rows;
  const double accept = 0.5 / std::sqrt(static_cast<double>(p));
  std::vector<double> w(p);
  for (; *next < p; ++*next) {
    std::fill(w.begin(), w.end(), 0.0);
    w[*next] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < filled; ++c) {
        const double* uc = u.col(c);
        const double s = dot(uc, w.data(), p);
        for (std::size_t i = 0; i < p; ++i) w[i] -= s * uc[i];
      }
    }
    const double norm = std::sqrt(dot(w.data(), w.data(), p));
    if (norm > accept) {
      double* dst = u.col(filled);
      for (std::size_t i = 0; i < p; ++i) dst[i] = w[i] / norm;
      ++*next;
      return;
    }
  }
  throw NumericalError("svd: failed to complete an orthonormal basis");
}

struct TallSvd {
  ColumnMajor u;  // p x q
  Vector sigma;   // q
  ColumnMajor v;  // q x q
};

TallSvd tall_svd(ColumnMajor a) {
  const std::size_t p = a.rows;
  const std::size_t q = a.cols;

  ColumnMajor qfactor(0, 0);
  const bool reduce = p > q;
  if (reduce) {
    qfactor = householder_qr(a);
    ColumnMajor r(q, q);
    for (std::size_t c = 0; c < q; ++c) std::copy_n(a.col(c), c + 1, r.col(c));
    a = std::move(r);
  }

  ColumnMajor v(q, q);
  for (std::size_t c = 0; c < q; ++c) v.col(c)[c] = 1.0;
  one_sided_jacobi(a, v);

  const std::size_t inner = a.rows;
  Vector norms(q);
  for (std::size_t c = 0; c < q; ++c) norms[c] = std::sqrt(dot(a.col(c), a.col(c), inner));

  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  TallSvd out{ColumnMajor(inner, q), Vector(q, 0.0), ColumnMajor(q, q)};
  const double top = q ? norms[order[0]] : 0.0;
  const double floor = kSingularValueClamp * top;
  std::size_t next_basis = 0;
  for (std::size_t pos = 0; pos < q; ++pos) {
    const std::size_t src = order[pos];
    std::copy_n(v.col(src), q, out.v.col(pos));
    const double s = norms[src];
    if (s > 0.0 && s >= floor) {
      out.sigma[pos] = s;
      const double* col = a.col(src);
      double* dst = out.u.col(pos);
      for (std::size_t i = 0; i < inner; ++i) dst[i] = col[i] / s;
    } else {
      out.sigma[pos] = 0.0;
      complete_column(out.u, pos, &next_basis);
    }
  }

  if (reduce) {
    ColumnMajor full(p, q);
    for (std::size_t c = 0; c < q; ++c) {
      double* dst = full.col(c);
      const double* uc = out.u.col(c);
      for (std::size_t j = 0; j < q; ++j) {
        const double w = uc[j];
        if (w == 0.0) continue;
        const double* qj = qfactor.col(j);
        for (std::size_t i = 0; i < p; ++i) dst[i] += w * qj[i];
      }
    }
    out.u = std::move(full);
  }
  return out;
}

Matrix to_row_major(const ColumnMajor& m) {
  Matrix out(m.rows, m.cols);
  for (std::size_t c = 0; c < m.cols; ++c) {
    const double* col = m.col(c);
    for (std::size_t i = 0; i < m.rows; ++i) out(i, c) = col[i];
  }
  return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw ArgumentError("svd: empty matrix");
  if (!a.all_finite()) throw ArgumentError("svd: matrix has non-finite entries");

  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const bool wide = m < n;

  // Row-major data of a is the column-major layout of a^T.
  ColumnMajor work(wide ? n : m, wide ? m : n);
  if (wide) {
    std::copy(a.values().begin(), a.values().end(), work.data.begin());
  } else {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) work.col(j)[i] = a(i, j);
  }

  TallSvd t = tall_svd(std::move(work));
  SvdResult out;
  out.sigma = std::move(t.sigma);
  if (wide) {
    out.u = to_row_major(t.v);
    out.v = to_row_major(t.u);
  } else {
    out.u = to_row_major(t.u);
    out.v = to_row_major(t.v);
  }

  // Sign convention: largest-magnitude entry of each u column is non-negative.
  const std::size_t k = out.sigma.size();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < out.u.rows(); ++i) {
      const double mag = std::abs(out.u(i, c));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (out.u(arg, c) < 0.0) {
      for (std::size_t i = 0; i < out.u.rows(); ++i) out.u(i, c) = -out.u(i, c);
      for (std::size_t i = 0; i < out.v.rows(); ++i) out.v(i, c) = -out.v(i, c);
    }
  }
  return out;
}

LowRankFactors truncate(const SvdResult& s, std::size_t r) {
  const std::size_t k = s.sigma.size();
  if (r < 1 || r > k) {
    throw ArgumentError("truncate: rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(k) + "]");
  }
  LowRankFactors out{Matrix(s.u.rows(), r), Matrix(r, s.v.rows())};
  for (std::size_t i = 0; i < s.u.rows(); ++i)
    for (std::size_t c = 0; c < r; ++c) out.left(i, c) = s.u(i, c) * s.sigma[c];
  for (std::size_t c = 0; c < r; ++c)
    for (std::size_t j = 0; j < s.v.rows(); ++j) out.proj(c, j) = s.v(j, c);
  return out;
}

}  // namespace rnnpress

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
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rnnpress/linalg.hpp"
#include "rnnpress/model.hpp"

namespace rnnpress {

/// Keep the largest rank whose explained-variance fraction stays at or
/// below `tau`, with tau in (0, 1].
struct VarianceThreshold {
  double tau = 1.0;
};

/// One projection rank per hidden layer, each in [1, N^l].
struct ExplicitRanks {
  std::vector<std::size_t> ranks;
};

using RankPolicy = std::variant<VarianceThreshold, ExplicitRanks>;

/// Throws ArgumentError if the policy is out of range for `arch`.
void validate_policy(const RankPolicy& policy, const Architecture& arch);

struct LayerReport {
  std::size_t index = 0;  // 1-based, matching container tensor names
  std::size_t rank = 0;
  double explained_fraction = 0.0;
  std::size_t spectrum_length = 0;
  double rec_err_abs = 0.0;
  double rec_err_rel = 0.0;
  double inter_err_abs = 0.0;
  double inter_err_rel = 0.0;

  friend bool operator==(const LayerReport&, const LayerReport&) = default;
};

struct CompressionReport {
  std::vector<LayerReport> layers;
  std::uint64_t params_before = 0;
  std::uint64_t params_after = 0;

  /// params_after / params_before: the compressed size as a fraction of the
  /// original.
  double ratio() const noexcept;

  friend bool operator==(const CompressionReport&, const CompressionReport&) = default;
};

/// Canonical JSON (sorted keys): layers[{index, rank, explained_fraction,
/// spectrum_length, rec_err_abs, rec_err_rel, inter_err_abs, inter_err_rel}],
/// params_before, params_after, ratio.
std::string report_to_json(const CompressionReport& report);
CompressionReport report_from_json(std::string_view text);

/// Fraction of squared singular mass carried by the leading `k` values.
double explained_fraction(std::span<const double> sigma, std::size_t k);

/// Largest k with explained_fraction(sigma, k) <= tau. Returns 1 when even
/// the first singular value exceeds tau. Throws ArgumentError for an unsorted
/// or negative spectrum or tau outside (0, 1], NumericalError for an
/// all-zero spectrum.
std::size_t select_rank(std::span<const double> sigma, double tau);

/// Truncated SVD of W_h: returns (Z_h, P) with P = V_r^T.
LowRankFactors factorize_recurrent(const Matrix& w_h, std::size_t r);

/// Least-squares Z_x with Z_x * p ~= w_x.
Matrix solve_interlayer(const Matrix& w_x, const Matrix& p);

struct CompressOptions {
  /// Worker threads across layers; 0 picks the hardware concurrency.
  unsigned threads = 1;
};

struct CompressionResult {
  Model model;
  CompressionReport report;
};

/// Jointly factors every hidden layer's recurrent and outgoing inter-layer
/// matrices through one shared projection. The input matrix, biases and
/// peepholes are copied unchanged. The result does not depend on the thread
/// count. Throws StateError if `model` already has factored layers.
CompressionResult compress_model(const Model& model, const RankPolicy& policy,
                                 const CompressOptions& options = {});

}  // namespace rnnpress

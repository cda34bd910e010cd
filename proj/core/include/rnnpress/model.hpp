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
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "rnnpress/matrix.hpp"

namespace rnnpress {

enum class CellType { kVanillaRnn, kLstm };

/// "rnn" or "lstm", as used in the container header and on the command line.
std::string_view to_string(CellType cell);
/// Throws ArgumentError for anything other than "rnn" / "lstm".
CellType parse_cell_type(std::string_view name);

/// Number of stacked gate blocks per cell: 4 for LSTM, 1 for a vanilla RNN.
std::size_t gate_count(CellType cell) noexcept;

struct Architecture {
  CellType cell_type = CellType::kLstm;
  std::size_t input_dim = 0;
  std::vector<std::size_t> layer_sizes;
  std::size_t output_dim = 0;

  std::size_t gates() const noexcept { return gate_count(cell_type); }
  std::size_t num_layers() const noexcept { return layer_sizes.size(); }
  /// Rows of the matrix leaving layer `l` (0-based): G * N^{l+1}, or
  /// output_dim for the last layer.
  std::size_t outgoing_rows(std::size_t l) const;

  /// Throws ArgumentError on an empty layer list or a zero dimension.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Per-gate matrices of an LSTM layer. Stacking order is always
/// [input, forget, cell, output].
struct GateBundle {
  Matrix input_gate;
  Matrix forget_gate;
  Matrix cell;
  Matrix output_gate;

  friend bool operator==(const GateBundle&, const GateBundle&) = default;
};

Matrix stack_gates(const GateBundle& bundle);
GateBundle unstack_gates(const Matrix& stacked);

struct FullWeights {
  Matrix recurrent;   // W_h: G*N x N
  Matrix interlayer;  // W_x: (G*N' or output_dim) x N

  friend bool operator==(const FullWeights&, const FullWeights&) = default;
};

/// Jointly factored weights: recurrent = recurrent_left * projection and
/// interlayer = interlayer_left * projection, sharing one r x N projection.
struct FactoredWeights {
  Matrix recurrent_left;   // Z_h: G*N x r
  Matrix projection;       // P:   r x N
  Matrix interlayer_left;  // Z_x: (G*N' or output_dim) x r

  std::size_t rank() const noexcept { return projection.rows(); }

  friend bool operator==(const FactoredWeights&, const FactoredWeights&) = default;
};

struct Peepholes {
  Vector input_gate;
  Vector forget_gate;
  Vector output_gate;

  friend bool operator==(const Peepholes&, const Peepholes&) = default;
};

struct LayerWeights {
  std::variant<FullWeights, FactoredWeights> weights;
  Vector bias;                         // G*N
  std::optional<Peepholes> peepholes;  // LSTM only, never compressed

  bool factored() const noexcept { return std::holds_alternative<FactoredWeights>(weights); }
  std::size_t hidden_size() const noexcept;
  std::size_t outgoing_rows() const noexcept;
  /// Dense W_h, reconstructed from the factors when factored.
  Matrix recurrent_matrix() const;
  /// Dense W_x, reconstructed from the factors when factored.
  Matrix interlayer_matrix() const;

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct Model {
  Architecture arch;
  Matrix input_matrix;  // W_x^0: G*N^1 x input_dim, never compressed
  std::vector<LayerWeights> layers;
  Vector output_bias;

  bool compressed() const noexcept;
  /// Per-layer projection rank, or N^l for an unfactored layer.
  std::vector<std::size_t> ranks() const;
  /// Checks every shape against the architecture; throws ArgumentError.
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Exact number of stored scalars in the model.
std::uint64_t param_count(const Model& model);

/// Closed-form count for `arch` with every layer factored at `ranks`
/// (one rank per layer), or unfactored when `ranks` is empty.
std::uint64_t param_count(const Architecture& arch, std::span<const std::size_t> ranks = {});

/// Deterministic fixture model. Weights are uniform in [-0.2, 0.2) and
/// peepholes uniform in [-0.1, 0.1), drawn from SplitMix64(seed) in container
/// tensor order (row-major within each tensor) and rounded to f32 so that
/// save/load is lossless. Biases are zero.
Model generate_random(const Architecture& arch, std::uint64_t seed);

/// A model of the given architecture with every parameter zero.
Model zero_model(const Architecture& arch);

}  // namespace rnnpress

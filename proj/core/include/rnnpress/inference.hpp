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
#include <vector>

#include "rnnpress/matrix.hpp"
#include "rnnpress/model.hpp"

namespace rnnpress {

/// T x input_dim feature frames.
struct Sequence {
  Matrix steps;
};

/// Recurrent state of one layer. `projected` caches P * hidden for factored
/// layers: it is consumed by the next layer at the same step and by this
/// layer's own recurrence at the following step, so it is computed once.
struct LayerState {
  Vector hidden;
  Vector cell;       // LSTM only
  Vector projected;  // factored layers only

  friend bool operator==(const LayerState&, const LayerState&) = default;
};

LayerState initial_state(const LayerWeights& layer, CellType cell);

/// One vanilla RNN step: h_t = tanh(drive + W_h h_{t-1} + b), where `drive`
/// is the already-applied incoming inter-layer product W_x h^{l-1}_t.
LayerState rnn_step(const LayerWeights& layer, std::span<const double> drive,
                    const LayerState& state);

/// One peephole LSTM step on the stacked pre-activation
/// a = drive + W_h m_{t-1} + b, split as [i, f, c, o]:
///   i = sigmoid(a_i + p_i * c_{t-1}),  f = sigmoid(a_f + p_f * c_{t-1})
///   c_t = f * c_{t-1} + i * tanh(a_c)
///   o = sigmoid(a_o + p_o * c_t),      m_t = o * tanh(c_t)
LayerState lstm_step(const LayerWeights& layer, std::span<const double> drive,
                     const LayerState& state);

/// Product of the layer's outgoing inter-layer matrix with its current
/// output: W_x m_t, or Z_x (P m_t) using the cached projection.
Vector outgoing(const LayerWeights& layer, const LayerState& state);

/// Runs the stack from zero state and returns T x output_dim logits.
Matrix forward(const Model& model, const Sequence& seq);

struct DivergenceMetrics {
  double max_abs_diff = 0.0;
  double mean_abs_diff = 0.0;
  /// ||out_a - out_b||_F / ||out_a||_F over all stacked outputs; the plain
  /// Frobenius distance when out_a is identically zero.
  double relative_frobenius = 0.0;
};

DivergenceMetrics compare(const Model& a, const Model& b, std::span<const Sequence> seqs);

/// Frames uniform in [-1, 1), rounded to f32 so they survive the sequence
/// file format unchanged.
Sequence random_sequence(std::size_t steps, std::size_t dim, std::uint64_t seed);
std::vector<Sequence> random_sequences(std::size_t count, std::size_t steps, std::size_t dim,
                                       std::uint64_t seed);

}  // namespace rnnpress

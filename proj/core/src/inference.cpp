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

#include "rnnpress/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rnnpress/errors.hpp"
#include "rnnpress/linalg.hpp"
#include "rnnpress/random.hpp"

namespace rnnpress {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_drive(const LayerWeights& layer, std::size_t gates, std::span<const double> drive,
                 const LayerState& state) {
  const std::size_t n = layer.hidden_size();
  if (drive.size() != gates * n) {
    throw ArgumentError("step: drive has length " + std::to_string(drive.size()) + ", expected " +
                        std::to_string(gates * n));
  }
  if (state.hidden.size() != n) throw ArgumentError("step: state does not match layer size");
  if (layer.bias.size() != gates * n) throw ArgumentError("step: bias does not match layer");
}

// drive + W_h * h_{t-1} + b
Vector preactivation(const LayerWeights& layer, std::span<const double> drive,
                     const LayerState& state) {
  Vector a(drive.begin(), drive.end());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += layer.bias[i];
  if (const auto* full = std::get_if<FullWeights>(&layer.weights)) {
    matvec_add(full->recurrent, state.hidden, a);
  } else {
    const auto& f = std::get<FactoredWeights>(layer.weights);
    if (state.projected.size() != f.rank()) {
      throw ArgumentError("step: projected state does not match layer rank");
    }
    matvec_add(f.recurrent_left, state.projected, a);
  }
  return a;
}

void project(const LayerWeights& layer, LayerState& state) {
  if (const auto* f = std::get_if<FactoredWeights>(&layer.weights)) {
    state.projected = matvec(f->projection, state.hidden);
  }
}

}  // namespace

LayerState initial_state(const LayerWeights& layer, CellType cell) {
  const std::size_t n = layer.hidden_size();
  LayerState s;
  s.hidden.assign(n, 0.0);
  if (cell == CellType::kLstm) s.cell.assign(n, 0.0);
  if (const auto* f = std::get_if<FactoredWeights>(&layer.weights)) {
    s.projected.assign(f->rank(), 0.0);
  }
  return s;
}

LayerState rnn_step(const LayerWeights& layer, std::span<const double> drive,
                    const LayerState& state) {
  check_drive(layer, 1, drive, state);
  Vector a = preactivation(layer, drive, state);
  LayerState next;
  next.hidden.resize(a.size());
  std::transform(a.begin(), a.end(), next.hidden.begin(), [](double x) { return std::tanh(x); });
  project(layer, next);
  return next;
}

LayerState lstm_step(const LayerWeights& layer, std::span<const double> drive,
                     const LayerState& state) {
  check_drive(layer, 4, drive, state);
  if (!layer.peepholes) throw ArgumentError("lstm_step: layer has no peepholes");
  const std::size_t n = layer.hidden_size();
  if (state.cell.size() != n) throw ArgumentError("lstm_step: cell state does not match layer");
  const auto& peep = *layer.peepholes;

  const Vector a = preactivation(layer, drive, state);
  LayerState next;
  next.hidden.resize(n);
  next.cell.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double c_prev = state.cell[j];
    const double i = sigmoid(a[j] + peep.input_gate[j] * c_prev);
    const double f = sigmoid(a[n + j] + peep.forget_gate[j] * c_prev);
    const double c = f * c_prev + i * std::tanh(a[2 * n + j]);
    const double o = sigmoid(a[3 * n + j] + peep.output_gate[j] * c);
    next.cell[j] = c;
    next.hidden[j] = o * std::tanh(c);
  }
  project(layer, next);
  return next;
}

Vector outgoing(const LayerWeights& layer, const LayerState& state) {
  if (const auto* full = std::get_if<FullWeights>(&layer.weights)) {
    return matvec(full->interlayer, state.hidden);
  }
  return matvec(std::get<FactoredWeights>(layer.weights).interlayer_left, state.projected);
}

Matrix forward(const Model& model, const Sequence& seq) {
  const auto& arch = model.arch;
  if (seq.steps.cols() != arch.input_dim) {
    throw ArgumentError("forward: sequence has dimension " + std::to_string(seq.steps.cols()) +
                        ", model expects " + std::to_string(arch.input_dim));
  }
  if (seq.steps.rows() == 0) throw ArgumentError("forward: empty sequence");
  model.validate();

  std::vector<LayerState> states;
  states.reserve(model.layers.size());
  for (const auto& layer : model.layers) states.push_back(initial_state(layer, arch.cell_type));

  const bool lstm = arch.cell_type == CellType::kLstm;
  Matrix out(seq.steps.rows(), arch.output_dim);
  for (std::size_t t = 0; t < seq.steps.rows(); ++t) {
    Vector drive = matvec(model.input_matrix, seq.steps.row(t));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& layer = model.layers[l];
      states[l] = lstm ? lstm_step(layer, drive, states[l]) : rnn_step(layer, drive, states[l]);
      drive = outgoing(layer, states[l]);
    }
    auto row = out.row(t);
    for (std::size_t k = 0; k < arch.output_dim; ++k) row[k] = drive[k] + model.output_bias[k];
  }
  return out;
}

DivergenceMetrics compare(const Model& a, const Model& b, std::span<const Sequence> seqs) {
  if (a.arch.input_dim != b.arch.input_dim || a.arch.output_dim != b.arch.output_dim) {
    throw ArgumentError("compare: models differ in input or output dimension");
  }
  double max_abs = 0.0;
  double sum_abs = 0.0;
  double diff_sq = 0.0;
  double ref_sq = 0.0;
  std::size_t count = 0;
  for (const auto& seq : seqs) {
    const Matrix ya = forward(a, seq);
    const Matrix yb = forward(b, seq);
    const auto va = ya.values();
    const auto vb = yb.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
      const double d = std::abs(va[i] - vb[i]);
      max_abs = std::max(max_abs, d);
      sum_abs += d;
      diff_sq += d * d;
      ref_sq += va[i] * va[i];
    }
    count += va.size();
  }
  DivergenceMetrics m;
  m.max_abs_diff = max_abs;
  m.mean_abs_diff = count ? sum_abs / static_cast<double>(count) : 0.0;
  m.relative_frobenius = ref_sq > 0.0 ? std::sqrt(diff_sq / ref_sq) : std::sqrt(diff_sq);
  return m;
}

Sequence random_sequence(std::size_t steps, std::size_t dim, std::uint64_t seed) {
  if (steps == 0 || dim == 0) throw ArgumentError("random_sequence: empty shape");
  SplitMix64 rng(seed);
  Sequence s{Matrix(steps, dim)};
  for (double& x : s.steps.values()) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return s;
}

std::vector<Sequence> random_sequences(std::size_t count, std::size_t steps, std::size_t dim,
                                       std::uint64_t seed) {
  std::vector<Sequence> out;
  out.reserve(count);
  SplitMix64 seeds(seed);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_sequence(steps, dim, seeds.next()));
  return out;
}

}  // namespace rnnpress

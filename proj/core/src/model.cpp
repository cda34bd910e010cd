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

#include "rnnpress/model.hpp"

#include <string>
#include <type_traits>

#include "rnnpress/errors.hpp"
#include "rnnpress/linalg.hpp"
#include "rnnpress/random.hpp"

namespace rnnpress {

std::string_view to_string(CellType cell) {
  return cell == CellType::kLstm ? "lstm" : "rnn";
}

CellType parse_cell_type(std::string_view name) {
  if (name == "lstm") return CellType::kLstm;
  if (name == "rnn") return CellType::kVanillaRnn;
  throw ArgumentError("unknown cell type '" + std::string(name) + "' (expected rnn or lstm)");
}

std::size_t gate_count(CellType cell) noexcept { return cell == CellType::kLstm ? 4 : 1; }

std::size_t Architecture::outgoing_rows(std::size_t l) const {
  if (l >= layer_sizes.size()) throw ArgumentError("layer index out of range");
  return l + 1 == layer_sizes.size() ? output_dim : gates() * layer_sizes[l + 1];
}

void Architecture::validate() const {
  if (layer_sizes.empty()) throw ArgumentError("architecture has no hidden layers");
  if (input_dim == 0) throw ArgumentError("input_dim must be positive");
  if (output_dim == 0) throw ArgumentError("output_dim must be positive");
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    if (layer_sizes[l] == 0) {
      throw ArgumentError("layer " + std::to_string(l + 1) + " has zero cells");
    }
  }
}

Matrix stack_gates(const GateBundle& b) {
  const std::size_t rows = b.input_gate.rows();
  const std::size_t cols = b.input_gate.cols();
  for (const Matrix* g : {&b.forget_gate, &b.cell, &b.output_gate}) {
    if (g->rows() != rows || g->cols() != cols) {
      throw ArgumentError("stack_gates: gate matrices differ in shape");
    }
  }
  Matrix out(4 * rows, cols);
  std::size_t offset = 0;
  for (const Matrix* g : {&b.input_gate, &b.forget_gate, &b.cell, &b.output_gate}) {
    std::copy(g->values().begin(), g->values().end(), out.values().begin() + offset);
    offset += g->size();
  }
  return out;
}

GateBundle unstack_gates(const Matrix& m) {
  if (m.rows() % 4 != 0) {
    throw ArgumentError("unstack_gates: " + std::to_string(m.rows()) +
                        " rows is not divisible into four gates");
  }
  const std::size_t n = m.rows() / 4;
  return {m.row_block(0, n), m.row_block(n, n), m.row_block(2 * n, n), m.row_block(3 * n, n)};
}

std::size_t LayerWeights::hidden_size() const noexcept {
  return std::visit(
      [](const auto& w) {
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, FullWeights>) {
          return w.recurrent.cols();
        } else {
          return w.projection.cols();
        }
      },
      weights);
}

std::size_t LayerWeights::outgoing_rows() const noexcept {
  return std::visit(
      [](const auto& w) {
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, FullWeights>) {
          return w.interlayer.rows();
        } else {
          return w.interlayer_left.rows();
        }
      },
      weights);
}

Matrix LayerWeights::recurrent_matrix() const {
  if (const auto* full = std::get_if<FullWeights>(&weights)) return full->recurrent;
  const auto& f = std::get<FactoredWeights>(weights);
  return matmul(f.recurrent_left, f.projection);
}

Matrix LayerWeights::interlayer_matrix() const {
  if (const auto* full = std::get_if<FullWeights>(&weights)) return full->interlayer;
  const auto& f = std::get<FactoredWeights>(weights);
  return matmul(f.interlayer_left, f.projection);
}

bool Model::compressed() const noexcept {
  for (const auto& layer : layers)
    if (layer.factored()) return true;
  return false;
}

std::vector<std::size_t> Model::ranks() const {
  std::vector<std::size_t> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) {
    if (const auto* f = std::get_if<FactoredWeights>(&layer.weights)) {
      out.push_back(f->rank());
    } else {
      out.push_back(layer.hidden_size());
    }
  }
  return out;
}

namespace {

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ArgumentError(name + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void expect_length(const Vector& v, std::size_t n, const std::string& name) {
  if (v.size() != n) {
    throw ArgumentError(name + " has length " + std::to_string(v.size()) + ", expected " +
                        std::to_string(n));
  }
}

}  // namespace

void Model::validate() const {
  arch.validate();
  const std::size_t g = arch.gates();
  expect_shape(input_matrix, g * arch.layer_sizes[0], arch.input_dim, "W_x.0");
  if (layers.size() != arch.num_layers()) {
    throw ArgumentError("model has " + std::to_string(layers.size()) + " layers, architecture " +
                        std::to_string(arch.num_layers()));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::size_t n = arch.layer_sizes[l];
    const std::size_t out_rows = arch.outgoing_rows(l);
    const std::string tag = "." + std::to_string(l + 1);
    if (const auto* full = std::get_if<FullWeights>(&layer.weights)) {
      expect_shape(full->recurrent, g * n, n, "W_h" + tag);
      expect_shape(full->interlayer, out_rows, n, "W_x" + tag);
    } else {
      const auto& f = std::get<FactoredWeights>(layer.weights);
      const std::size_t r = f.rank();
      if (r < 1 || r > n) {
        throw ArgumentError("P" + tag + " rank " + std::to_string(r) + " outside [1, " +
                            std::to_string(n) + "]");
      }
      expect_shape(f.projection, r, n, "P" + tag);
      expect_shape(f.recurrent_left, g * n, r, "Z_h" + tag);
      expect_shape(f.interlayer_left, out_rows, r, "Z_x" + tag);
    }
    expect_length(layer.bias, g * n, "b" + tag);
    if (arch.cell_type == CellType::kLstm) {
      if (!layer.peepholes) throw ArgumentError("LSTM layer" + tag + " is missing peepholes");
      expect_length(layer.peepholes->input_gate, n, "peep_i" + tag);
      expect_length(layer.peepholes->forget_gate, n, "peep_f" + tag);
      expect_length(layer.peepholes->output_gate, n, "peep_o" + tag);
    } else if (layer.peepholes) {
      throw ArgumentError("vanilla RNN layer" + tag + " carries peepholes");
    }
  }
  expect_length(output_bias, arch.output_dim, "b.out");
}

std::uint64_t param_count(const Model& model) {
  std::uint64_t total = model.input_matrix.size() + model.output_bias.size();
  for (const auto& layer : model.layers) {
    if (const auto* full = std::get_if<FullWeights>(&layer.weights)) {
      total += full->recurrent.size() + full->interlayer.size();
    } else {
      const auto& f = std::get<FactoredWeights>(layer.weights);
      total += f.recurrent_left.size() + f.projection.size() + f.interlayer_left.size();
    }
    total += layer.bias.size();
    if (layer.peepholes) {
      total += layer.peepholes->input_gate.size() + layer.peepholes->forget_gate.size() +
               layer.peepholes->output_gate.size();
    }
  }
  return total;
}

std::uint64_t param_count(const Architecture& arch, std::span<const std::size_t> ranks) {
  arch.validate();
  if (!ranks.empty() && ranks.size() != arch.num_layers()) {
    throw ArgumentError("expected one rank per layer");
  }
  const std::uint64_t g = arch.gates();
  std::uint64_t total = g * arch.layer_sizes[0] * arch.input_dim + arch.output_dim;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::uint64_t n = arch.layer_sizes[l];
    const std::uint64_t out_rows = arch.outgoing_rows(l);
    if (ranks.empty()) {
      total += g * n * n + out_rows * n;
    } else {
      const std::uint64_t r = ranks[l];
      if (r < 1 || r > n) throw ArgumentError("rank outside [1, N] for layer " + std::to_string(l + 1));
      total += g * n * r + r * n + out_rows * r;
    }
    total += g * n;
    if (arch.cell_type == CellType::kLstm) total += 3 * n;
  }
  return total;
}

namespace {

double draw(SplitMix64& rng, double bound) {
  return static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
}

void fill(Matrix& m, SplitMix64& rng, double bound) {
  for (double& x : m.values()) x = draw(rng, bound);
}

void fill(Vector& v, SplitMix64& rng, double bound) {
  for (double& x : v) x = draw(rng, bound);
}

constexpr double kWeightBound = 0.2;
constexpr double kPeepholeBound = 0.1;

}  // namespace

Model zero_model(const Architecture& arch) {
  arch.validate();
  const std::size_t g = arch.gates();
  Model m;
  m.arch = arch;
  m.input_matrix = Matrix(g * arch.layer_sizes[0], arch.input_dim);
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::size_t n = arch.layer_sizes[l];
    LayerWeights layer;
    layer.weights = FullWeights{Matrix(g * n, n), Matrix(arch.outgoing_rows(l), n)};
    layer.bias.assign(g * n, 0.0);
    if (arch.cell_type == CellType::kLstm) {
      layer.peepholes = Peepholes{Vector(n, 0.0), Vector(n, 0.0), Vector(n, 0.0)};
    }
    m.layers.push_back(std::move(layer));
  }
  m.output_bias.assign(arch.output_dim, 0.0);
  return m;
}

Model generate_random(const Architecture& arch, std::uint64_t seed) {
  Model m = zero_model(arch);
  SplitMix64 rng(seed);
  fill(m.input_matrix, rng, kWeightBound);
  for (auto& layer : m.layers) {
    auto& full = std::get<FullWeights>(layer.weights);
    fill(full.recurrent, rng, kWeightBound);
    fill(full.interlayer, rng, kWeightBound);
    if (layer.peepholes) {
      fill(layer.peepholes->input_gate, rng, kPeepholeBound);
      fill(layer.peepholes->forget_gate, rng, kPeepholeBound);
      fill(layer.peepholes->output_gate, rng, kPeepholeBound);
    }
  }
  return m;
}

}  // namespace rnnpress

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
#include <filesystem>
#include <span>
#include <vector>

#include "rnnpress/model.hpp"

namespace rnnpress {

/// Model container (".rnnz"), little-endian throughout:
///
///   bytes 0-3   magic "RNNZ"
///   bytes 4-7   u32 format version (kContainerVersion)
///   bytes 8-15  u64 header length in bytes
///   header      UTF-8 JSON: cell_type, input_dim, layer_sizes, output_dim,
///               gate_order ["i","f","c","o"], tensors[{name, rows, cols,
///               dtype "f32", offset}]
///   payload     row-major f32 tensors at the declared byte offsets
///
/// Tensor names: W_x.0 (input matrix); per layer l = 1..L either W_h.l and
/// W_x.l, or Z_h.l, P.l and Z_x.l; b.l; peep_i.l, peep_f.l, peep_o.l for
/// LSTM; b.out. Vectors are stored as n x 1 tensors.
inline constexpr std::uint32_t kContainerVersion = 1;

std::vector<std::byte> encode_model(const Model& model);
/// Throws LoadError with a kind naming the defect.
Model decode_model(std::span<const std::byte> bytes);

/// Writes through a temporary file in the same directory and renames it into
/// place, so a failed save never leaves a partial file at `path`.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Atomic whole-file write shared by every rnnpress writer.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
std::vector<std::byte> read_file(const std::filesystem::path& path);

}  // namespace rnnpress

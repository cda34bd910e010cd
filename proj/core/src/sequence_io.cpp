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

#include "rnnpress/sequence_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "rnnpress/container.hpp"
#include "rnnpress/errors.hpp"

namespace rnnpress {
namespace {

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::span<const std::byte> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::byte> encode_sequence(const Sequence& seq) {
  if (seq.steps.rows() == 0 || seq.steps.cols() == 0) throw ArgumentError("empty sequence");
  if (!seq.steps.all_finite()) throw ArgumentError("sequence has non-finite values");
  std::vector<std::byte> out;
  out.reserve(8 + 4 * seq.steps.size());
  put_u32(out, static_cast<std::uint32_t>(seq.steps.rows()));
  put_u32(out, static_cast<std::uint32_t>(seq.steps.cols()));
  for (double v : seq.steps.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Sequence decode_sequence(std::span<const std::byte> bytes) {
  if (bytes.size() < 8) throw LoadError(LoadErrorKind::kTruncated, "sequence header");
  const std::uint64_t steps = get_u32(bytes, 0);
  const std::uint64_t dim = get_u32(bytes, 4);
  if (steps == 0 || dim == 0) throw LoadError(LoadErrorKind::kShapeMismatch, "empty sequence");
  const std::uint64_t count = steps * dim;
  if (bytes.size() - 8 < 4 * count) {
    throw LoadError(LoadErrorKind::kTruncated, "sequence declares " + std::to_string(count) +
                                                   " values");
  }
  if (bytes.size() - 8 != 4 * count) {
    throw LoadError(LoadErrorKind::kShapeMismatch, "trailing bytes after sequence payload");
  }
  Sequence s{Matrix(steps, dim)};
  auto values = s.steps.values();
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes, 8 + 4 * i));
    if (!std::isfinite(v)) throw LoadError(LoadErrorKind::kNonFinite, "sequence value");
    values[i] = v;
  }
  return s;
}

void save_sequence(const Sequence& seq, const std::filesystem::path& path) {
  write_file_atomic(path, encode_sequence(seq));
}

Sequence load_sequence(const std::filesystem::path& path) { return decode_sequence(read_file(path)); }

}  // namespace rnnpress

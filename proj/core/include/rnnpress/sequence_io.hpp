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
#include <filesystem>
#include <span>
#include <vector>

#include "rnnpress/inference.hpp"

namespace rnnpress {

// Sequence file: u32 T, u32 dim, then T * dim little-endian f32 values.
std::vector<std::byte> encode_sequence(const Sequence& seq);
Sequence decode_sequence(std::span<const std::byte> bytes);

void save_sequence(const Sequence& seq, const std::filesystem::path& path);
Sequence load_sequence(const std::filesystem::path& path);

}  // namespace rnnpress

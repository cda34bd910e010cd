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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rnnpress {

/// Base class of every exception thrown by rnnpress.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied arguments that violate an operation's preconditions
/// (shape mismatch, out-of-range rank, malformed policy).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The operation is not valid for the object's current state, e.g.
/// compressing a model that is already factored.
class StateError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to produce a trustworthy answer. Carries the
/// model layer (1-based) when the failure happened inside a layer.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::size_t> layer = std::nullopt)
      : Error(what), layer_(layer) {}

  std::optional<std::size_t> layer() const noexcept { return layer_; }

 private:
  std::optional<std::size_t> layer_;
};

/// The Gram matrix of a projection is too ill-conditioned to invert.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class LoadErrorKind {
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kMalformedHeader,
  kTruncated,
  kShapeMismatch,
  kNonFinite,
};

std::string_view to_string(LoadErrorKind kind);

/// Failure while decoding a model container or sequence file.
class LoadError : public Error {
 public:
  LoadError(LoadErrorKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  LoadErrorKind kind() const noexcept { return kind_; }

 private:
  LoadErrorKind kind_;
};

}  // namespace rnnpress

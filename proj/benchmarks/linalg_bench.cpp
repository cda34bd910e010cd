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

#include <benchmark/benchmark.h>

#include "rnnpress/linalg.hpp"
#include "rnnpress/random.hpp"

namespace {

rnnpress::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  rnnpress::SplitMix64 rng(seed);
  rnnpress::Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(-1.0, 1.0);
  return m;
}

// Stacked-gate LSTM recurrent shape: 4N x N.
void BM_SvdStackedGates(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(4 * n, n, 1);
  for (auto _ : state) {
    auto s = rnnpress::svd(a);
    benchmark::DoNotOptimize(s.sigma.data());
  }
}
BENCHMARK(BM_SvdStackedGates)->Arg(64)->Arg(128)->Arg(256)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SvdSquare(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 2);
  for (auto _ : state) {
    auto s = rnnpress::svd(a);
    benchmark::DoNotOptimize(s.sigma.data());
  }
}
BENCHMARK(BM_SvdSquare)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_LeastSquaresOrthonormal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = rnnpress::truncate(rnnpress::svd(random_matrix(n, n, 3)), n / 2).proj;
  const auto w = random_matrix(4 * n, n, 4);
  for (auto _ : state) {
    auto z = rnnpress::least_squares_rowspace(p, w);
    benchmark::DoNotOptimize(z.values().data());
  }
}
BENCHMARK(BM_LeastSquaresOrthonormal)->Arg(128)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(4 * n, n, 5);
  const rnnpress::Vector x(n, 0.5);
  for (auto _ : state) {
    auto y = rnnpress::matvec(a, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size()));
}
BENCHMARK(BM_Matvec)->Arg(128)->Arg(500);

}  // namespace

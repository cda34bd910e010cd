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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "rnnpress/compress.hpp"
#include "rnnpress/errors.hpp"
#include "rnnpress/inference.hpp"

namespace rnnpress {
namespace {

TEST(SelectRankTest, WorkedExamples) {
  EXPECT_EQ(select_rank(Vector{1, 1, 1, 1}, 0.5), 2u);
  // Fractions 9/14, 13/14, 1.
  EXPECT_EQ(select_rank(Vector{3, 2, 1}, 0.9), 1u);
  EXPECT_EQ(select_rank(Vector{3, 2, 1}, 13.0 / 14.0 + 1e-12), 2u);
  // Empty feasible set falls back to rank 1.
  EXPECT_EQ(select_rank(Vector{5, 0, 0}, 0.9), 1u);
  EXPECT_EQ(select_rank(Vector{3, 2, 1}, 1.0), 3u);
}

TEST(SelectRankTest, AtMostTauNotCoverage) {
  // A coverage rule would pick 3 here; the at-most rule picks 2.
  EXPECT_EQ(select_rank(Vector{2, 2, 1, 1}, 0.85), 2u);
}

TEST(SelectRankTest, Errors) {
  EXPECT_THROW(select_rank(Vector{0, 0}, 0.5), NumericalError);
  EXPECT_THROW(select_rank(Vector{1, 2}, 0.5), ArgumentError);
  EXPECT_THROW(select_rank(Vector{1, -1}, 0.5), ArgumentError);
  EXPECT_THROW(select_rank(Vector{}, 0.5), ArgumentError);
  EXPECT_THROW(select_rank(Vector{1}, 0.0), ArgumentError);
  EXPECT_THROW(select_rank(Vector{1}, 1.5), ArgumentError);
}

Vector random_spectrum(std::mt19937& gen) {
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> val(0.0, 10.0);
  Vector s(static_cast<std::size_t>(len(gen)));
  for (double& x : s) x = val(gen);
  s[0] += 1e-3;
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

TEST(SelectRankTest, MonotoneInTau) {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> tau(1e-6, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Vector s = random_spectrum(gen);
    double t1 = tau(gen), t2 = tau(gen);
    if (t1 > t2) std::swap(t1, t2);
    EXPECT_LE(select_rank(s, t1), select_rank(s, t2));
  }
}

TEST(SelectRankTest, ScaleInvariant) {
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> tau(1e-6, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 300; ++trial) {
    Vector s = random_spectrum(gen);
    const double t = tau(gen);
    const std::size_t r = select_rank(s, t);
    const double c = scale(gen);
    for (double& x : s) x *= c;
    EXPECT_EQ(select_rank(s, t), r);
  }
}

TEST(FactorizeRecurrentTest, DiagonalFullRankIsLossless) {
  const double d[] = {3.0, 2.0, 1.0};
  const Matrix w = Matrix::diagonal(d);
  const auto f = factorize_recurrent(w, 3);
  EXPECT_LE(frobenius_distance(matmul(f.left, f.proj), w), 1e-10);
}

TEST(FactorizeRecurrentTest, DiagonalRankOne) {
  const double d[] = {3.0, 2.0, 1.0};
  const Matrix w = Matrix::diagonal(d);
  const auto f = factorize_recurrent(w, 1);
  EXPECT_NEAR(frobenius_distance(matmul(f.left, f.proj), w), std::sqrt(5.0), 1e-14);
}

TEST(FactorizeRecurrentTest, StackedGateResidualMatchesDiscardedSpectrum) {
  // 4N x N with N = 2.
  const Matrix w = testing::random_matrix(8, 2, 31);
  const auto spectrum = svd(w).sigma;
  const auto f = factorize_recurrent(w, 1);
  const double expected = spectrum[1];
  EXPECT_NEAR(frobenius_distance(matmul(f.left, f.proj), w), expected, 1e-8 * expected);

  const Matrix w4 = testing::random_matrix(16, 4, 32);
  const auto s4 = svd(w4).sigma;
  const auto f4 = factorize_recurrent(w4, 2);
  const double tail = std::sqrt(s4[2] * s4[2] + s4[3] * s4[3]);
  EXPECT_NEAR(frobenius_distance(matmul(f4.left, f4.proj), w4), tail, 1e-8 * tail);
  EXPECT_LE(frobenius_distance(matmul_transposed(f4.proj, f4.proj), Matrix::identity(2)), 1e-12);
}

TEST(FactorizeRecurrentTest, RankOutOfRange) {
  EXPECT_THROW(factorize_recurrent(Matrix(8, 2), 3), ArgumentError);
  EXPECT_THROW(factorize_recurrent(Matrix(8, 2), 0), ArgumentError);
}

TEST(SolveInterlayerTest, FullRankOrthogonalProjectionIsLossless) {
  const Matrix p = truncate(svd(testing::random_matrix(12, 5, 1)), 5).proj;
  const Matrix w = testing::random_matrix(7, 5, 2);
  const Matrix z = solve_interlayer(w, p);
  EXPECT_LE(frobenius_distance(matmul(z, p), w), 1e-9 * frobenius_norm(w));
}

TEST(SolveInterlayerTest, IdentityProjection) {
  const Matrix w = testing::random_matrix(3, 2, 3);
  EXPECT_EQ(solve_interlayer(w, Matrix::identity(2)), w);
}

TEST(SolveInterlayerTest, ResidualEqualsComplementProjection) {
  const Matrix p = truncate(svd(testing::random_matrix(12, 6, 4)), 3).proj;
  const Matrix w = testing::random_matrix(5, 6, 5);
  const Matrix z = solve_interlayer(w, p);
  // w (I - P^T P), built with the naive reference product.
  const Matrix ptp = testing::naive_product(testing::naive_transpose(p), p);
  const Matrix complement = subtract(Matrix::identity(6), ptp);
  const double expected = frobenius_norm(testing::naive_product(w, complement));
  EXPECT_NEAR(frobenius_distance(matmul(z, p), w), expected, 1e-9);
}

TEST(SolveInterlayerTest, PerturbationNeverHelps) {
  const Matrix p = truncate(svd(testing::random_matrix(8, 6, 6)), 2).proj;
  const Matrix w = testing::random_matrix(4, 6, 7);
  const Matrix z = solve_interlayer(w, p);
  const double best = testing::residual_sq(z, p, w);
  std::mt19937 gen(8);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    Matrix delta(z.rows(), z.cols());
    for (double& x : delta.values()) x = dist(gen);
    const double scale = 1e-3 * frobenius_norm(z) / frobenius_norm(delta);
    Matrix zz = z;
    for (std::size_t i = 0; i < z.size(); ++i) zz.values()[i] += scale * delta.values()[i];
    EXPECT_GE(testing::residual_sq(zz, p, w), best);
  }
}

TEST(SolveInterlayerTest, ShapeMismatch) {
  EXPECT_THROW(solve_interlayer(Matrix(3, 4), Matrix::identity(3)), ArgumentError);
}

TEST(CompressModelTest, TauOneIsLossless) {
  for (CellType cell : {CellType::kLstm, CellType::kVanillaRnn}) {
    const Model m = generate_random(Architecture{cell, 6, {8, 7, 5}, 4}, 21);
    const auto [c, report] = compress_model(m, VarianceThreshold{1.0});
    EXPECT_EQ(c.ranks(), (std::vector<std::size_t>{8, 7, 5}));
    for (const auto& l : report.layers) {
      EXPECT_EQ(l.explained_fraction, 1.0);
      EXPECT_LE(l.rec_err_rel, 1e-12);
      EXPECT_LE(l.inter_err_rel, 1e-12);
    }
    const auto seqs = random_sequences(3, 20, 6, 4);
    EXPECT_LE(compare(m, c, seqs).max_abs_diff, 1e-9);
  }
}

TEST(CompressModelTest, LeavesUncompressedPartsUntouched) {
  const Model m = generate_random(Architecture{CellType::kLstm, 6, {8, 7}, 4}, 22);
  const Model c = compress_model(m, ExplicitRanks{{3, 2}}).model;
  EXPECT_EQ(c.input_matrix, m.input_matrix);
  EXPECT_EQ(c.output_bias, m.output_bias);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    EXPECT_EQ(c.layers[l].bias, m.layers[l].bias);
    EXPECT_EQ(c.layers[l].peepholes, m.layers[l].peepholes);
    const auto& f = std::get<FactoredWeights>(c.layers[l].weights);
    EXPECT_EQ(f.recurrent_left.cols(), f.projection.rows());
    EXPECT_EQ(f.interlayer_left.cols(), f.projection.rows());
  }
}

TEST(CompressModelTest, ReportMatchesDirectComputation) {
  const Model m = generate_random(Architecture{CellType::kLstm, 5, {6, 4}, 3}, 23);
  const auto result = compress_model(m, ExplicitRanks{{2, 3}});
  ASSERT_EQ(result.report.layers.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& r = result.report.layers[l];
    EXPECT_EQ(r.index, l + 1);
    const Matrix w_h = m.layers[l].recurrent_matrix();
    const auto sigma = svd(w_h).sigma;
    double head = 0, total = 0, tail = 0;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      total += sigma[j] * sigma[j];
      (j < r.rank ? head : tail) += sigma[j] * sigma[j];
    }
    EXPECT_NEAR(r.explained_fraction, head / total, 1e-14);
    EXPECT_NEAR(r.rec_err_abs, std::sqrt(tail), 1e-8 * std::sqrt(tail));
    EXPECT_NEAR(r.rec_err_rel, r.rec_err_abs / frobenius_norm(w_h), 1e-15);
    EXPECT_EQ(r.spectrum_length, sigma.size());
    EXPECT_GE(r.inter_err_abs, 0.0);
  }
  EXPECT_EQ(result.report.params_before, param_count(m));
  EXPECT_EQ(result.report.params_after, param_count(result.model));
  EXPECT_LT(result.report.params_after, result.report.params_before);
  EXPECT_DOUBLE_EQ(result.report.ratio(), static_cast<double>(result.report.params_after) /
                                              static_cast<double>(result.report.params_before));
}

TEST(CompressModelTest, ConstructedRankDeficientRecurrence) {
  Model m = generate_random(Architecture{CellType::kVanillaRnn, 4, {10}, 3}, 24);
  // Rank-3 W_h with singular values 3, 2, 1.
  const Matrix q = testing::random_orthonormal_rows(3, 10, 2);
  const Matrix ortho_u = transpose(testing::random_orthonormal_rows(3, 10, 3));
  Matrix w_h(10, 10);
  const double s[] = {3.0, 2.0, 1.0};
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      for (std::size_t k = 0; k < 3; ++k) w_h(i, j) += ortho_u(i, k) * s[k] * q(k, j);
  std::get<FullWeights>(m.layers[0].weights).recurrent = w_h;

  const Vector spectrum = svd(w_h).sigma;
  for (std::size_t j = 3; j < 10; ++j) EXPECT_EQ(spectrum[j], 0.0);

  // Fractions 9/14, 13/14, then exactly 1 from k = 3 onward.
  EXPECT_EQ(compress_model(m, VarianceThreshold{0.999}).report.layers[0].rank, 2u);
  EXPECT_EQ(compress_model(m, VarianceThreshold{0.95}).report.layers[0].rank, 2u);
  EXPECT_EQ(compress_model(m, VarianceThreshold{0.9}).report.layers[0].rank, 1u);
  EXPECT_EQ(compress_model(m, VarianceThreshold{1.0}).report.layers[0].rank, 10u);
  const auto exact = compress_model(m, ExplicitRanks{{3}});
  EXPECT_LE(exact.report.layers[0].rec_err_abs, 1e-12);
}

TEST(CompressModelTest, AlreadyCompressedIsStateError) {
  const Model m = generate_random(Architecture{CellType::kLstm, 3, {4}, 2}, 1);
  const Model c = compress_model(m, ExplicitRanks{{2}}).model;
  EXPECT_THROW(compress_model(c, ExplicitRanks{{2}}), StateError);
}

TEST(CompressModelTest, PolicyValidation) {
  const Model m = generate_random(Architecture{CellType::kLstm, 3, {4, 5}, 2}, 1);
  EXPECT_THROW(compress_model(m, ExplicitRanks{{2}}), ArgumentError);
  EXPECT_THROW(compress_model(m, ExplicitRanks{{5, 2}}), ArgumentError);
  EXPECT_THROW(compress_model(m, ExplicitRanks{{0, 2}}), ArgumentError);
  EXPECT_THROW(compress_model(m, VarianceThreshold{0.0}), ArgumentError);
  EXPECT_THROW(compress_model(m, VarianceThreshold{1.5}), ArgumentError);
}

TEST(CompressModelTest, ZeroRecurrenceReportsLayerIndex) {
  Model m = zero_model(Architecture{CellType::kLstm, 3, {4, 5}, 2});
  std::get<FullWeights>(m.layers[0].weights).recurrent = testing::random_matrix(16, 4, 1);
  try {
    compress_model(m, VarianceThreshold{0.5});
    FAIL();
  } catch (const NumericalError& e) {
    ASSERT_TRUE(e.layer().has_value());
    EXPECT_EQ(*e.layer(), 2u);
  }
}

TEST(CompressModelTest, IndependentOfThreadCount) {
  const Model m = generate_random(Architecture{CellType::kLstm, 6, {9, 8, 7, 6}, 4}, 25);
  const auto serial = compress_model(m, VarianceThreshold{0.7}, {1});
  const auto parallel = compress_model(m, VarianceThreshold{0.7}, {4});
  const auto automatic = compress_model(m, VarianceThreshold{0.7}, {0});
  EXPECT_EQ(serial.model, parallel.model);
  EXPECT_EQ(serial.report, parallel.report);
  EXPECT_EQ(serial.model, automatic.model);
}

TEST(CompressModelTest, LayerResultsIndependentOfNeighbours) {
  const Model m = generate_random(Architecture{CellType::kLstm, 6, {9, 8}, 4}, 26);
  Model changed = m;
  std::get<FullWeights>(changed.layers[1].weights).recurrent = testing::random_matrix(32, 8, 99);
  const auto a = compress_model(m, ExplicitRanks{{4, 4}});
  const auto b = compress_model(changed, ExplicitRanks{{4, 4}});
  EXPECT_EQ(a.model.layers[0], b.model.layers[0]);
  EXPECT_EQ(a.report.layers[0], b.report.layers[0]);
}

TEST(CompressModelTest, ParamsDoNotIncreaseBelowBreakEvenRank) {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    Architecture arch{CellType::kLstm, 1 + gen() % 10, {}, 1 + gen() % 10};
    std::vector<std::size_t> ranks;
    const std::size_t depth = 1 + gen() % 3;
    for (std::size_t l = 0; l < depth; ++l) arch.layer_sizes.push_back(1 + gen() % 12);
    for (std::size_t l = 0; l < arch.layer_sizes.size(); ++l) {
      const std::size_t n = arch.layer_sizes[l];
      const std::size_t o = arch.outgoing_rows(l);
      const std::size_t limit = n * (4 * n + o) / (5 * n + o);
      ranks.push_back(limit == 0 ? 0 : 1 + gen() % limit);
    }
    if (std::find(ranks.begin(), ranks.end(), 0) != ranks.end()) continue;
    const auto r = compress_model(generate_random(arch, trial), ExplicitRanks{ranks});
    EXPECT_LE(r.report.params_after, r.report.params_before);
  }
}

TEST(CompressModelTest, BaselineAtTableRanks) {
  const Model m = generate_random(testing::baseline_architecture(), 1);
  const auto r = compress_model(m, ExplicitRanks{{80, 105, 130, 145, 150}}, {0});
  EXPECT_EQ(r.report.params_before, 9'678'542u);
  EXPECT_EQ(r.report.params_after, 3'108'842u);
  EXPECT_EQ(param_count(r.model), 3'108'842u);
}

TEST(ReportJsonTest, RoundTripAndStableFields) {
  const Model m = generate_random(Architecture{CellType::kLstm, 5, {6, 4}, 3}, 27);
  const auto report = compress_model(m, VarianceThreshold{0.8}).report;
  const std::string text = report_to_json(report);
  EXPECT_EQ(report_from_json(text), report);
  const auto j = nlohmann::json::parse(text);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"layers", "params_after", "params_before", "ratio"}));
  std::vector<std::string> layer_keys;
  for (auto it = j["layers"][0].begin(); it != j["layers"][0].end(); ++it) layer_keys.push_back(it.key());
  EXPECT_EQ(layer_keys, (std::vector<std::string>{"explained_fraction", "index", "inter_err_abs",
                                                  "inter_err_rel", "rank", "rec_err_abs",
                                                  "rec_err_rel", "spectrum_length"}));
  EXPECT_THROW(report_from_json("{}"), ArgumentError);
}

}  // namespace
}  // namespace rnnpress

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

#include "rnnpress/compress.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <json.hpp>

#include "rnnpress/errors.hpp"

namespace rnnpress {

double CompressionReport::ratio() const noexcept {
  return params_before == 0 ? 0.0
                            : static_cast<double>(params_after) / static_cast<double>(params_before);
}

void validate_policy(const RankPolicy& policy, const Architecture& arch) {
  if (const auto* t = std::get_if<VarianceThreshold>(&policy)) {
    if (!(t->tau > 0.0 && t->tau <= 1.0)) {
      throw ArgumentError("tau must lie in (0, 1], got " + std::to_string(t->tau));
    }
    return;
  }
  const auto& ranks = std::get<ExplicitRanks>(policy).ranks;
  if (ranks.size() != arch.num_layers()) {
    throw ArgumentError("expected " + std::to_string(arch.num_layers()) + " ranks, got " +
                        std::to_string(ranks.size()));
  }
  for (std::size_t l = 0; l < ranks.size(); ++l) {
    if (ranks[l] < 1 || ranks[l] > arch.layer_sizes[l]) {
      throw ArgumentError("rank " + std::to_string(ranks[l]) + " for layer " +
                          std::to_string(l + 1) + " outside [1, " +
                          std::to_string(arch.layer_sizes[l]) + "]");
    }
  }
}

double explained_fraction(std::span<const double> sigma, std::size_t k) {
  double head = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    total += sigma[j] * sigma[j];
    if (j + 1 == k) head = total;
  }
  if (k >= sigma.size()) head = total;
  return total > 0.0 ? head / total : 0.0;
}

std::size_t select_rank(std::span<const double> sigma, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ArgumentError("tau must lie in (0, 1], got " + std::to_string(tau));
  }
  if (sigma.empty()) throw ArgumentError("select_rank: empty spectrum");
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] >= 0.0) || !std::isfinite(sigma[j])) {
      throw ArgumentError("select_rank: singular values must be finite and non-negative");
    }
    if (j > 0 && sigma[j] > sigma[j - 1]) {
      throw ArgumentError("select_rank: spectrum is not sorted non-increasing");
    }
  }
  if (sigma.front() == 0.0) throw NumericalError("select_rank: degenerate all-zero spectrum");

  // Prefix sums; the last one is the total, so the k = N fraction is exactly 1.
  Vector cumulative(sigma.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    acc += sigma[j] * sigma[j];
    cumulative[j] = acc;
  }
  const double total = cumulative.back();
  std::size_t rank = 1;
  for (std::size_t k = 1; k <= sigma.size(); ++k) {
    if (cumulative[k - 1] / total <= tau) rank = k;
  }
  return rank;
}

LowRankFactors factorize_recurrent(const Matrix& w_h, std::size_t r) {
  if (r < 1 || r > std::min(w_h.rows(), w_h.cols())) {
    throw ArgumentError("factorize_recurrent: rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(std::min(w_h.rows(), w_h.cols())) + "]");
  }
  return truncate(svd(w_h), r);
}

Matrix solve_interlayer(const Matrix& w_x, const Matrix& p) {
  if (p.cols() != w_x.cols()) {
    throw ArgumentError("solve_interlayer: projection has " + std::to_string(p.cols()) +
                        " columns, inter-layer matrix " + std::to_string(w_x.cols()));
  }
  return least_squares_rowspace(p, w_x);
}

namespace {

struct LayerOutcome {
  FactoredWeights weights;
  LayerReport report;
};

double relative(double err, double norm) { return norm > 0.0 ? err / norm : err; }

LayerOutcome compress_layer(const LayerWeights& layer, std::size_t index, const RankPolicy& policy) {
  const auto& full = std::get<FullWeights>(layer.weights);
  const SvdResult spectrum = svd(full.recurrent);

  std::size_t rank = 0;
  if (const auto* t = std::get_if<VarianceThreshold>(&policy)) {
    rank = select_rank(spectrum.sigma, t->tau);
  } else {
    rank = std::get<ExplicitRanks>(policy).ranks[index];
  }

  LowRankFactors factors = truncate(spectrum, rank);
  Matrix z_x = solve_interlayer(full.interlayer, factors.proj);

  LayerOutcome out;
  out.report.index = index + 1;
  out.report.rank = rank;
  out.report.explained_fraction = explained_fraction(spectrum.sigma, rank);
  out.report.spectrum_length = spectrum.sigma.size();
  out.report.rec_err_abs = frobenius_distance(full.recurrent, matmul(factors.left, factors.proj));
  out.report.rec_err_rel = relative(out.report.rec_err_abs, frobenius_norm(full.recurrent));
  out.report.inter_err_abs = frobenius_distance(full.interlayer, matmul(z_x, factors.proj));
  out.report.inter_err_rel = relative(out.report.inter_err_abs, frobenius_norm(full.interlayer));
  out.weights = FactoredWeights{std::move(factors.left), std::move(factors.proj), std::move(z_x)};
  return out;
}

}  // namespace

CompressionResult compress_model(const Model& model, const RankPolicy& policy,
                                 const CompressOptions& options) {
  model.validate();
  if (model.compressed()) throw StateError("model is already compressed");
  validate_policy(policy, model.arch);

  const std::size_t layers = model.layers.size();
  std::vector<LayerOutcome> outcomes(layers);
  std::vector<std::exception_ptr> errors(layers);

  auto run = [&](std::size_t l) {
    try {
      outcomes[l] = compress_layer(model.layers[l], l, policy);
    } catch (const SingularityError& e) {
      errors[l] = std::make_exception_ptr(
          SingularityError("layer " + std::to_string(l + 1) + ": " + e.what(), l + 1));
    } catch (const NumericalError& e) {
      errors[l] = std::make_exception_ptr(
          NumericalError("layer " + std::to_string(l + 1) + ": " + e.what(), l + 1));
    } catch (...) {
      errors[l] = std::current_exception();
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, layers));
  if (threads <= 1) {
    for (std::size_t l = 0; l < layers; ++l) run(l);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t l = next++; l < layers; l = next++) run(l);
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  CompressionResult result;
  result.model = model;
  for (std::size_t l = 0; l < layers; ++l) {
    result.model.layers[l].weights = std::move(outcomes[l].weights);
    result.report.layers.push_back(outcomes[l].report);
  }
  result.report.params_before = param_count(model);
  result.report.params_after = param_count(result.model);
  return result;
}

std::string report_to_json(const CompressionReport& report) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : report.layers) {
    j["layers"].push_back({{"index", l.index},
                           {"rank", l.rank},
                           {"explained_fraction", l.explained_fraction},
                           {"spectrum_length", l.spectrum_length},
                           {"rec_err_abs", l.rec_err_abs},
                           {"rec_err_rel", l.rec_err_rel},
                           {"inter_err_abs", l.inter_err_abs},
                           {"inter_err_rel", l.inter_err_rel}});
  }
  j["params_before"] = report.params_before;
  j["params_after"] = report.params_after;
  j["ratio"] = report.ratio();
  return j.dump(2);
}

CompressionReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CompressionReport r;
    for (const auto& l : j.at("layers")) {
      LayerReport lr;
      lr.index = l.at("index").get<std::size_t>();
      lr.rank = l.at("rank").get<std::size_t>();
      lr.explained_fraction = l.at("explained_fraction").get<double>();
      lr.spectrum_length = l.at("spectrum_length").get<std::size_t>();
      lr.rec_err_abs = l.at("rec_err_abs").get<double>();
      lr.rec_err_rel = l.at("rec_err_rel").get<double>();
      lr.inter_err_abs = l.at("inter_err_abs").get<double>();
      lr.inter_err_rel = l.at("inter_err_rel").get<double>();
      r.layers.push_back(lr);
    }
    r.params_before = j.at("params_before").get<std::uint64_t>();
    r.params_after = j.at("params_after").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed compression report: ") + e.what());
  }
}

}  // namespace rnnpress

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

// rnnpress command-line front end.
//
//   generate   write a seeded random fixture model
//   compress   jointly factor a model (--tau or --ranks) and emit a report
//   inspect    architecture summary as JSON
//   spectra    per-layer singular values of the recurrent matrices
//   params     stored parameter count
//   eval       output divergence between two models on the same inputs

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rnnpress/compress.hpp"
#include "rnnpress/container.hpp"
#include "rnnpress/errors.hpp"
#include "rnnpress/inference.hpp"
#include "rnnpress/linalg.hpp"
#include "rnnpress/model.hpp"
#include "rnnpress/sequence_io.hpp"

namespace rnnpress::cli {
namespace {

using nlohmann::json;

struct GenerateArgs {
  std::string cell;
  std::size_t inputs = 0;
  std::vector<std::size_t> layers;
  std::size_t outputs = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct CompressArgs {
  std::string in;
  std::optional<double> tau;
  std::vector<std::size_t> ranks;
  std::string out;
  std::string report;
};

struct EvalArgs {
  std::string a;
  std::string b;
  std::size_t seqs = 10;
  std::size_t len = 50;
  std::uint64_t seed = 1;
  std::vector<std::string> inputs;
};

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

unsigned threads_from_env() {
  const char* raw = std::getenv("RNNPRESS_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(raw, &used);
    if (used != std::string(raw).size() || v > 4096) throw std::invalid_argument(raw);
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw ArgumentError(std::string("RNNPRESS_THREADS must be a non-negative integer, got '") +
                        raw + "'");
  }
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  Architecture arch;
  arch.cell_type = parse_cell_type(a.cell);
  arch.input_dim = a.inputs;
  arch.layer_sizes = a.layers;
  arch.output_dim = a.outputs;
  arch.validate();
  const Model m = generate_random(arch, a.seed);
  save_model(m, a.out);
  out << "params: " << param_count(m) << '\n';
  return kOk;
}

int cmd_compress(const CompressArgs& a, std::ostream& out) {
  if (a.tau.has_value() == !a.ranks.empty()) {
    throw ArgumentError("exactly one of --tau or --ranks is required");
  }
  RankPolicy policy = a.tau ? RankPolicy{VarianceThreshold{*a.tau}}
                            : RankPolicy{ExplicitRanks{a.ranks}};
  if (a.tau && !(*a.tau > 0.0 && *a.tau <= 1.0)) {
    throw ArgumentError("--tau must lie in (0, 1]");
  }
  const Model model = load_model(a.in);
  const CompressionResult result = compress_model(model, policy, {threads_from_env()});

  const std::string report = report_to_json(result.report);
  const auto encoded = encode_model(result.model);
  if (!a.report.empty()) {
    const std::string text = report + "\n";
    write_file_atomic(a.report, std::as_bytes(std::span(text.data(), text.size())));
  }
  write_file_atomic(a.out, encoded);
  out << report << '\n';
  return kOk;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  const Model m = load_model(path);
  json j;
  j["cell_type"] = std::string(to_string(m.arch.cell_type));
  j["input_dim"] = m.arch.input_dim;
  j["layer_sizes"] = m.arch.layer_sizes;
  j["output_dim"] = m.arch.output_dim;
  j["compressed"] = m.compressed();
  j["ranks"] = m.ranks();
  j["params"] = param_count(m);
  print_json(out, j);
  return kOk;
}

int cmd_spectra(const std::string& path, std::ostream& out) {
  const Model m = load_model(path);
  json layers = json::array();
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const SvdResult s = svd(m.layers[l].recurrent_matrix());
    layers.push_back({{"index", l + 1}, {"sigma", s.sigma}});
  }
  print_json(out, json{{"layers", std::move(layers)}});
  return kOk;
}

int cmd_params(const std::string& path, std::ostream& out) {
  out << "params: " << param_count(load_model(path)) << '\n';
  return kOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Model ma = load_model(a.a);
  const Model mb = load_model(a.b);
  if (ma.arch.input_dim != mb.arch.input_dim || ma.arch.output_dim != mb.arch.output_dim) {
    throw LoadError(LoadErrorKind::kShapeMismatch, "models differ in input or output dimension");
  }
  std::vector<Sequence> seqs;
  if (!a.inputs.empty()) {
    for (const auto& p : a.inputs) {
      seqs.push_back(load_sequence(p));
      if (seqs.back().steps.cols() != ma.arch.input_dim) {
        throw LoadError(LoadErrorKind::kShapeMismatch, p + ": sequence dimension does not match model");
      }
    }
  } else {
    if (a.seqs == 0 || a.len == 0) throw ArgumentError("--seqs and --len must be positive");
    seqs = random_sequences(a.seqs, a.len, ma.arch.input_dim, a.seed);
  }
  const DivergenceMetrics d = compare(ma, mb, seqs);
  print_json(out, json{{"max_abs_diff", d.max_abs_diff},
                       {"mean_abs_diff", d.mean_abs_diff},
                       {"relative_frobenius", d.relative_frobenius}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rnnpress: joint low-rank compression of recurrent networks"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a seeded random model");
  generate->add_option("--cell", gen.cell, "Cell type: rnn or lstm")->required();
  generate->add_option("--inputs", gen.inputs, "Input feature dimension")->required();
  generate->add_option("--layers", gen.layers, "Comma-separated hidden layer sizes")
      ->required()
      ->delimiter(',');
  generate->add_option("--outputs", gen.outputs, "Output dimension")->required();
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("-o,--out", gen.out, "Output container path")->required();

  CompressArgs comp;
  auto* compress = app.add_subcommand("compress", "Jointly factor recurrent and inter-layer weights");
  compress->add_option("input", comp.in, "Uncompressed model")->required();
  compress->add_option("--tau", comp.tau, "Explained-variance threshold in (0, 1]");
  compress->add_option("--ranks", comp.ranks, "Comma-separated projection ranks")->delimiter(',');
  compress->add_option("-o,--out", comp.out, "Compressed container path")->required();
  compress->add_option("--report", comp.report, "Also write the JSON report here");

  std::string inspect_path, spectra_path, params_path;
  auto* inspect = app.add_subcommand("inspect", "Print the architecture as JSON");
  inspect->add_option("model", inspect_path)->required();
  auto* spectra = app.add_subcommand("spectra", "Print recurrent singular values per layer");
  spectra->add_option("model", spectra_path)->required();
  auto* params = app.add_subcommand("params", "Print the stored parameter count");
  params->add_option("model", params_path)->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Output divergence of two models");
  eval->add_option("model_a", ev.a)->required();
  eval->add_option("model_b", ev.b)->required();
  eval->add_option("--seqs", ev.seqs, "Number of random sequences");
  eval->add_option("--len", ev.len, "Frames per random sequence");
  eval->add_option("--seed", ev.seed, "Sequence generator seed");
  eval->add_option("--input", ev.inputs, "Sequence file(s) to use instead of random input");

  std::vector<const char*> argv{"rnnpress"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*compress) return cmd_compress(comp, out);
    if (*inspect) return cmd_inspect(inspect_path, out);
    if (*spectra) return cmd_spectra(spectra_path, out);
    if (*params) return cmd_params(params_path, out);
    if (*eval) return cmd_eval(ev, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const StateError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace rnnpress::cli

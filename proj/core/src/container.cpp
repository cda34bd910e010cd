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

#include "rnnpress/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <system_error>

#include <json.hpp>

#include "rnnpress/errors.hpp"

namespace rnnpress {

std::string_view to_string(LoadErrorKind kind) {
  switch (kind) {
    case LoadErrorKind::kIo: return "io error";
    case LoadErrorKind::kBadMagic: return "bad magic";
    case LoadErrorKind::kUnsupportedVersion: return "unsupported version";
    case LoadErrorKind::kMalformedHeader: return "malformed header";
    case LoadErrorKind::kTruncated: return "truncated payload";
    case LoadErrorKind::kShapeMismatch: return "shape mismatch";
    case LoadErrorKind::kNonFinite: return "non-finite value";
  }
  return "unknown";
}

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'R', 'N', 'N', 'Z'};
constexpr std::size_t kPreambleBytes = 16;

class ByteWriter {
 public:
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
  void put_f32(double v) { put_u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void put_raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::byte*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::byte> take() { return std::move(bytes_); }

 private:
  std::vector<std::byte> bytes_;
};

std::uint32_t read_u32(std::span<const std::byte> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::span<const std::byte> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

struct TensorRef {
  std::string name;
  std::span<const double> values;
  std::size_t rows;
  std::size_t cols;
};

std::vector<TensorRef> tensors_of(const Model& m) {
  std::vector<TensorRef> out;
  auto add_matrix = [&](std::string name, const Matrix& x) {
    out.push_back({std::move(name), x.values(), x.rows(), x.cols()});
  };
  auto add_vector = [&](std::string name, const Vector& v) {
    out.push_back({std::move(name), v, v.size(), 1});
  };
  add_matrix("W_x.0", m.input_matrix);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    const std::string tag = "." + std::to_string(l + 1);
    if (const auto* full = std::get_if<FullWeights>(&layer.weights)) {
      add_matrix("W_h" + tag, full->recurrent);
      add_matrix("W_x" + tag, full->interlayer);
    } else {
      const auto& f = std::get<FactoredWeights>(layer.weights);
      add_matrix("Z_h" + tag, f.recurrent_left);
      add_matrix("P" + tag, f.projection);
      add_matrix("Z_x" + tag, f.interlayer_left);
    }
    add_vector("b" + tag, layer.bias);
    if (layer.peepholes) {
      add_vector("peep_i" + tag, layer.peepholes->input_gate);
      add_vector("peep_f" + tag, layer.peepholes->forget_gate);
      add_vector("peep_o" + tag, layer.peepholes->output_gate);
    }
  }
  add_vector("b.out", m.output_bias);
  return out;
}

struct DecodedTensor {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> values;
};

[[noreturn]] void fail(LoadErrorKind kind, const std::string& detail) {
  throw LoadError(kind, detail);
}

template <typename T>
T header_field(const json& header, const char* key) {
  if (!header.contains(key)) fail(LoadErrorKind::kMalformedHeader, std::string("missing ") + key);
  try {
    return header.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(LoadErrorKind::kMalformedHeader, std::string("field ") + key + ": " + e.what());
  }
}

class TensorTable {
 public:
  explicit TensorTable(std::map<std::string, DecodedTensor> tensors) : tensors_(std::move(tensors)) {}

  bool has(const std::string& name) const { return tensors_.contains(name); }

  std::size_t rows_of(const std::string& name) const { return find(name).rows; }

  Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) {
    DecodedTensor t = take(name, rows, cols);
    return Matrix(rows, cols, std::move(t.values));
  }

  Vector vector(const std::string& name, std::size_t n) { return take(name, n, 1).values; }

  void expect_consumed() const {
    if (!tensors_.empty()) {
      fail(LoadErrorKind::kShapeMismatch, "unexpected tensor " + tensors_.begin()->first);
    }
  }

 private:
  const DecodedTensor& find(const std::string& name) const {
    const auto it = tensors_.find(name);
    if (it == tensors_.end()) fail(LoadErrorKind::kShapeMismatch, "missing tensor " + name);
    return it->second;
  }

  DecodedTensor take(const std::string& name, std::size_t rows, std::size_t cols) {
    const DecodedTensor& found = find(name);
    if (found.rows != rows || found.cols != cols) {
      fail(LoadErrorKind::kShapeMismatch,
           name + " is " + std::to_string(found.rows) + "x" + std::to_string(found.cols) +
               ", architecture implies " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    auto node = tensors_.extract(name);
    return std::move(node.mapped());
  }

  std::map<std::string, DecodedTensor> tensors_;
};

}  // namespace

std::vector<std::byte> encode_model(const Model& model) {
  model.validate();
  const auto tensors = tensors_of(model);

  json header;
  header["cell_type"] = std::string(to_string(model.arch.cell_type));
  header["input_dim"] = model.arch.input_dim;
  header["layer_sizes"] = model.arch.layer_sizes;
  header["output_dim"] = model.arch.output_dim;
  header["gate_order"] = {"i", "f", "c", "o"};
  json entries = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    entries.push_back({{"name", t.name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"dtype", "f32"},
                       {"offset", offset}});
    offset += 4ULL * t.values.size();
  }
  header["tensors"] = std::move(entries);
  const std::string text = header.dump();

  ByteWriter w;
  w.put_raw(kMagic, 4);
  w.put_u32(kContainerVersion);
  w.put_u64(text.size());
  w.put_raw(text.data(), text.size());
  for (const auto& t : tensors) {
    for (double v : t.values) w.put_f32(v);
  }
  return w.take();
}

Model decode_model(std::span<const std::byte> bytes) {
  if (bytes.size() < 4) fail(LoadErrorKind::kTruncated, "file shorter than the magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(LoadErrorKind::kBadMagic, "expected RNNZ");
  if (bytes.size() < kPreambleBytes) fail(LoadErrorKind::kTruncated, "file shorter than preamble");
  const std::uint32_t version = read_u32(bytes, 4);
  if (version != kContainerVersion) {
    fail(LoadErrorKind::kUnsupportedVersion, "version " + std::to_string(version));
  }
  const std::uint64_t header_len = read_u64(bytes, 8);
  if (header_len > bytes.size() - kPreambleBytes) {
    fail(LoadErrorKind::kTruncated, "header length exceeds file size");
  }

  json header;
  try {
    const auto* text = reinterpret_cast<const char*>(bytes.data() + kPreambleBytes);
    header = json::parse(text, text + header_len);
  } catch (const json::parse_error& e) {
    fail(LoadErrorKind::kMalformedHeader, e.what());
  }
  if (!header.is_object()) fail(LoadErrorKind::kMalformedHeader, "header is not an object");

  Architecture arch;
  try {
    arch.cell_type = parse_cell_type(header_field<std::string>(header, "cell_type"));
  } catch (const ArgumentError& e) {
    fail(LoadErrorKind::kMalformedHeader, e.what());
  }
  arch.input_dim = header_field<std::size_t>(header, "input_dim");
  arch.layer_sizes = header_field<std::vector<std::size_t>>(header, "layer_sizes");
  arch.output_dim = header_field<std::size_t>(header, "output_dim");
  try {
    arch.validate();
  } catch (const ArgumentError& e) {
    fail(LoadErrorKind::kMalformedHeader, e.what());
  }
  if (header_field<std::vector<std::string>>(header, "gate_order") !=
      std::vector<std::string>{"i", "f", "c", "o"}) {
    fail(LoadErrorKind::kMalformedHeader, "gate_order must be [i, f, c, o]");
  }

  const auto payload = bytes.subspan(kPreambleBytes + header_len);
  const json& entries = header.contains("tensors") ? header["tensors"] : json();
  if (!entries.is_array()) fail(LoadErrorKind::kMalformedHeader, "tensors must be an array");

  std::map<std::string, DecodedTensor> decoded;
  std::uint64_t payload_end = 0;
  for (const auto& e : entries) {
    if (!e.is_object()) fail(LoadErrorKind::kMalformedHeader, "tensor entry is not an object");
    const auto name = header_field<std::string>(e, "name");
    const auto rows = header_field<std::uint64_t>(e, "rows");
    const auto cols = header_field<std::uint64_t>(e, "cols");
    const auto offset = header_field<std::uint64_t>(e, "offset");
    if (header_field<std::string>(e, "dtype") != "f32") {
      fail(LoadErrorKind::kMalformedHeader, name + ": only dtype f32 is supported");
    }
    if (rows == 0 || cols == 0 || rows > (1ULL << 32) || cols > (1ULL << 32)) {
      fail(LoadErrorKind::kShapeMismatch, name + ": invalid tensor dimensions");
    }
    const std::uint64_t count = rows * cols;
    if (offset > payload.size() || 4 * count > payload.size() - offset) {
      fail(LoadErrorKind::kTruncated, name + " declares " + std::to_string(count) +
                                          " values but the payload ends first");
    }
    payload_end = std::max(payload_end, offset + 4 * count);
    DecodedTensor t{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                    std::vector<double>(count)};
    for (std::uint64_t i = 0; i < count; ++i) {
      const float v = std::bit_cast<float>(read_u32(payload, offset + 4 * i));
      if (!std::isfinite(v)) fail(LoadErrorKind::kNonFinite, name);
      t.values[i] = v;
    }
    if (!decoded.emplace(name, std::move(t)).second) {
      fail(LoadErrorKind::kMalformedHeader, "duplicate tensor " + name);
    }
  }
  if (payload_end != payload.size()) {
    fail(LoadErrorKind::kShapeMismatch, "payload has " + std::to_string(payload.size() - payload_end) +
                                            " bytes not covered by any tensor");
  }

  TensorTable table(std::move(decoded));
  const std::size_t g = arch.gates();
  Model m;
  m.arch = arch;
  m.input_matrix = table.matrix("W_x.0", g * arch.layer_sizes[0], arch.input_dim);
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::size_t n = arch.layer_sizes[l];
    const std::size_t out_rows = arch.outgoing_rows(l);
    const std::string tag = "." + std::to_string(l + 1);
    LayerWeights layer;
    if (table.has("P" + tag)) {
      const std::size_t r = table.rows_of("P" + tag);
      if (r > n) fail(LoadErrorKind::kShapeMismatch, "P" + tag + " rank exceeds layer size");
      FactoredWeights f;
      f.recurrent_left = table.matrix("Z_h" + tag, g * n, r);
      f.projection = table.matrix("P" + tag, r, n);
      f.interlayer_left = table.matrix("Z_x" + tag, out_rows, r);
      layer.weights = std::move(f);
    } else {
      FullWeights f;
      f.recurrent = table.matrix("W_h" + tag, g * n, n);
      f.interlayer = table.matrix("W_x" + tag, out_rows, n);
      layer.weights = std::move(f);
    }
    layer.bias = table.vector("b" + tag, g * n);
    if (arch.cell_type == CellType::kLstm) {
      layer.peepholes = Peepholes{table.vector("peep_i" + tag, n), table.vector("peep_f" + tag, n),
                                  table.vector("peep_o" + tag, n)};
    }
    m.layers.push_back(std::move(layer));
  }
  m.output_bias = table.vector("b.out", arch.output_dim);
  table.expect_consumed();
  return m;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError(LoadErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw LoadError(LoadErrorKind::kIo, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw LoadError(LoadErrorKind::kIo, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::kIo, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw LoadError(LoadErrorKind::kIo, "failed reading " + path.string());
  return bytes;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

Model load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace rnnpress

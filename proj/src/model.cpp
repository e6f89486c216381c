// Copyright 2026 The loadfl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "loadfl/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "loadfl/error.hpp"
#include "loadfl/rng.hpp"

namespace loadfl {
namespace {

void check_layout(const std::vector<Segment>& layout, std::size_t d) {
  std::size_t offset = 0;
  for (const auto& s : layout) {
    if (s.offset != offset) {
      throw Error(ErrorKind::kDimensionMismatch, "segment '" + s.name + "' does not tile the vector");
    }
    offset += s.size();
  }
  if (offset != d) {
    throw Error(ErrorKind::kDimensionMismatch,
                "layout covers " + std::to_string(offset) + " of " + std::to_string(d));
  }
}

void check_batch(const ModelArch& arch, const ParamVector& params, Batch batch) {
  if (batch.width != arch.input_dim) {
    throw Error(ErrorKind::kDimensionMismatch, "batch width " + std::to_string(batch.width) +
                                                   " != input_dim " +
                                                   std::to_string(arch.input_dim));
  }
  if (batch.inputs.size() != batch.size() * batch.width) {
    throw Error(ErrorKind::kDimensionMismatch, "batch inputs/targets disagree");
  }
  if (params.size() != arch.param_count()) {
    throw Error(ErrorKind::kDimensionMismatch, "params have " + std::to_string(params.size()) +
                                                   " entries, arch needs " +
                                                   std::to_string(arch.param_count()));
  }
}

}  // namespace

ParamVector::ParamVector(std::vector<Segment> layout) : layout_(std::move(layout)) {
  std::size_t d = 0;
  for (const auto& s : layout_) d += s.size();
  values_.assign(d, 0.0);
  check_layout(layout_, d);
}

ParamVector::ParamVector(std::vector<Segment> layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  check_layout(layout_, values_.size());
}

ParamVector ParamVector::flat(std::vector<double> values) {
  std::vector<Segment> layout{{"flat", 0, values.size(), 1}};
  return ParamVector(std::move(layout), std::move(values));
}

std::span<const double> ParamVector::segment(std::string_view name) const {
  for (const auto& s : layout_) {
    if (s.name == name) return std::span<const double>(values_).subspan(s.offset, s.size());
  }
  throw Error(ErrorKind::kInvalidArgument, "no segment '" + std::string(name) + "'");
}

std::span<double> ParamVector::segment(std::string_view name) {
  for (const auto& s : layout_) {
    if (s.name == name) return std::span<double>(values_).subspan(s.offset, s.size());
  }
  throw Error(ErrorKind::kInvalidArgument, "no segment '" + std::string(name) + "'");
}

bool ParamVector::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ParamVector ParamVector::filled(double fill) const {
  ParamVector out = *this;
  std::fill(out.values_.begin(), out.values_.end(), fill);
  return out;
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kLinearAr ? "linear_ar" : "mlp";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear_ar") return ModelKind::kLinearAr;
  if (name == "mlp") return ModelKind::kMlp;
  throw Error(ErrorKind::kConfig, "unknown model kind '" + std::string(name) + "'");
}

void ModelArch::validate() const {
  if (input_dim == 0) throw Error(ErrorKind::kConfig, "model input_dim must be positive");
  if (kind == ModelKind::kMlp && hidden_dim == 0) {
    throw Error(ErrorKind::kConfig, "mlp hidden_dim must be positive");
  }
}

std::vector<Segment> ModelArch::layout() const {
  if (kind == ModelKind::kLinearAr) {
    return {{"w", 0, input_dim, 1}, {"b", input_dim, 1, 1}};
  }
  const std::size_t u = hidden_dim * input_dim;
  return {{"U", 0, hidden_dim, input_dim},
          {"c", u, hidden_dim, 1},
          {"v", u + hidden_dim, hidden_dim, 1},
          {"b", u + 2 * hidden_dim, 1, 1}};
}

std::size_t ModelArch::param_count() const {
  return kind == ModelKind::kLinearAr ? input_dim + 1 : hidden_dim * (input_dim + 2) + 1;
}

ParamVector init_params(const ModelArch& arch, std::uint64_t seed) {
  arch.validate();
  ParamVector p(arch.layout());
  if (arch.kind == ModelKind::kLinearAr) return p;

  Rng rng(seed);
  const auto glorot = [&](std::span<double> block, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : block) x = limit * (2.0 * rng.uniform() - 1.0);
  };
  glorot(p.segment("U"), arch.input_dim, arch.hidden_dim);
  glorot(p.segment("v"), arch.hidden_dim, 1);
  return p;
}

std::vector<double> forward(const ParamVector& params, const ModelArch& arch, Batch batch) {
  check_batch(arch, params, batch);
  const std::size_t n = batch.size();
  const std::size_t w = batch.width;
  std::vector<double> out(n);
  if (arch.kind == ModelKind::kLinearAr) {
    const auto wt = params.segment("w");
    const double b = params.segment("b")[0];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = b;
      for (std::size_t j = 0; j < w; ++j) acc += wt[j] * batch.inputs[i * w + j];
      out[i] = acc;
    }
    return out;
  }
  const auto u = params.segment("U");
  const auto c = params.segment("c");
  const auto v = params.segment("v");
  const double b = params.segment("b")[0];
  const std::size_t h = arch.hidden_dim;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b;
    for (std::size_t k = 0; k < h; ++k) {
      double pre = c[k];
      for (std::size_t j = 0; j < w; ++j) pre += u[k * w + j] * batch.inputs[i * w + j];
      acc += v[k] * std::tanh(pre);
    }
    out[i] = acc;
  }
  return out;
}

double loss(const ParamVector& params, const ModelArch& arch, Batch batch) {
  if (batch.size() == 0) throw Error(ErrorKind::kInvalidArgument, "empty batch");
  const auto pred = forward(params, arch, batch);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - batch.targets[i];
    acc += e * e;
  }
  return acc / static_cast<double>(pred.size());
}

LossGrad loss_and_grad(const ParamVector& params, const ModelArch& arch, Batch batch) {
  check_batch(arch, params, batch);
  const std::size_t n = batch.size();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty batch");
  const std::size_t w = batch.width;
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGrad out{0.0, params.filled(0.0)};
  if (arch.kind == ModelKind::kLinearAr) {
    const auto wt = params.segment("w");
    const double b = params.segment("b")[0];
    auto gw = out.grad.segment("w");
    double& gb = out.grad.segment("b")[0];
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = batch.inputs.subspan(i * w, w);
      double pred = b;
      for (std::size_t j = 0; j < w; ++j) pred += wt[j] * x[j];
      const double e = pred - batch.targets[i];
      out.loss += e * e;
      const double r = 2.0 * e * inv_n;
      for (std::size_t j = 0; j < w; ++j) gw[j] += r * x[j];
      gb += r;
    }
    out.loss *= inv_n;
    return out;
  }

  const auto u = params.segment("U");
  const auto c = params.segment("c");
  const auto v = params.segment("v");
  const double b = params.segment("b")[0];
  auto gu = out.grad.segment("U");
  auto gc = out.grad.segment("c");
  auto gv = out.grad.segment("v");
  double& gb = out.grad.segment("b")[0];
  const std::size_t h = arch.hidden_dim;
  std::vector<double> act(h);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = batch.inputs.subspan(i * w, w);
    double pred = b;
    for (std::size_t k = 0; k < h; ++k) {
      double pre = c[k];
      for (std::size_t j = 0; j < w; ++j) pre += u[k * w + j] * x[j];
      act[k] = std::tanh(pre);
      pred += v[k] * act[k];
    }
    const double e = pred - batch.targets[i];
    out.loss += e * e;
    const double r = 2.0 * e * inv_n;
    gb += r;
    for (std::size_t k = 0; k < h; ++k) {
      gv[k] += r * act[k];
      const double dpre = r * v[k] * (1.0 - act[k] * act[k]);
      gc[k] += dpre;
      for (std::size_t j = 0; j < w; ++j) gu[k * w + j] += dpre * x[j];
    }
  }
  out.loss *= inv_n;
  return out;
}

ParamVector apply_update(const ParamVector& params, const ParamVector& direction, double lr) {
  if (params.size() != direction.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "update direction has " +
                                                   std::to_string(direction.size()) +
                                                   " entries, params have " +
                                                   std::to_string(params.size()));
  }
  ParamVector out = params;
  auto dst = out.values();
  const auto dir = direction.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= lr * dir[i];
  return out;
}

std::vector<char> encode_f64_le(std::span<const double> values) {
  std::vector<char> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      out[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  return out;
}

std::vector<double> decode_f64_le(std::span<const char> bytes) {
  if (bytes.size() % 8 != 0) {
    throw Error(ErrorKind::kDimensionMismatch, "byte count is not a multiple of 8");
  }
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::string layout_json(const ParamVector& params) {
  nlohmann::ordered_json j;
  j["dimension"] = params.size();
  j["dtype"] = "float64-le";
  j["segments"] = nlohmann::ordered_json::array();
  for (const auto& s : params.layout()) {
    j["segments"].push_back({{"name", s.name}, {"offset", s.offset}, {"shape", {s.rows, s.cols}}});
  }
  return j.dump(2) + "\n";
}

void write_params(const ParamVector& params, const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  auto meta = stem;
  meta += ".json";
  const auto bytes = encode_f64_le(params.values());
  std::ofstream b(bin, std::ios::binary);
  std::ofstream m(meta);
  if (!b || !m) throw Error(ErrorKind::kIo, "cannot write " + stem.string());
  b.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  m << layout_json(params);
}

ParamVector read_params(const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  auto meta = stem;
  meta += ".json";
  std::ifstream b(bin, std::ios::binary);
  std::ifstream m(meta);
  if (!b || !m) throw Error(ErrorKind::kIo, "cannot read " + stem.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(m);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("bad layout sidecar: ") + e.what());
  }
  std::vector<Segment> layout;
  for (const auto& s : j.at("segments")) {
    layout.push_back({s.at("name").get<std::string>(), s.at("offset").get<std::size_t>(),
                      s.at("shape").at(0).get<std::size_t>(), s.at("shape").at(1).get<std::size_t>()});
  }
  auto values = decode_f64_le(bytes);
  if (values.size() != j.at("dimension").get<std::size_t>()) {
    throw Error(ErrorKind::kDimensionMismatch, "binary payload does not match sidecar dimension");
  }
  return ParamVector(std::move(layout), std::move(values));
}

}  // namespace loadfl

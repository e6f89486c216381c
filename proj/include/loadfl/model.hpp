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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace loadfl {

/// One named block of a flat parameter vector.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Segment&) const = default;
};

/// Dense parameter (or gradient) vector with a named segment layout.
class ParamVector {
 public:
  ParamVector() = default;
  /// Zero vector for `layout`. Segments must tile [0, d) in order.
  explicit ParamVector(std::vector<Segment> layout);
  ParamVector(std::vector<Segment> layout, std::vector<double> values);

  /// Single-segment vector named "flat".
  static ParamVector flat(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  const std::vector<Segment>& layout() const { return layout_; }
  std::span<const double> segment(std::string_view name) const;
  std::span<double> segment(std::string_view name);

  bool same_layout(const ParamVector& other) const { return layout_ == other.layout_; }
  bool all_finite() const;

  /// Copy with the same layout and all values set to `fill`.
  ParamVector filled(double fill) const;

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<Segment> layout_;
  std::vector<double> values_;
};

enum class ModelKind { kLinearAr, kMlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelArch {
  ModelKind kind = ModelKind::kLinearAr;
  std::size_t input_dim = 48;
  std::size_t hidden_dim = 16;  // mlp only; activation is tanh

  void validate() const;
  std::vector<Segment> layout() const;
  std::size_t param_count() const;
};

/// Non-owning view of b samples of width `width`.
struct Batch {
  std::size_t width = 0;
  std::span<const double> inputs;   // b * width, row-major
  std::span<const double> targets;  // b

  std::size_t size() const { return targets.size(); }
};

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// linear_ar starts at zero; mlp weights are Glorot-uniform and biases zero.
ParamVector init_params(const ModelArch& arch, std::uint64_t seed);

std::vector<double> forward(const ParamVector& params, const ModelArch& arch, Batch batch);

/// Mean squared error over the batch.
double loss(const ParamVector& params, const ModelArch& arch, Batch batch);

/// Mean squared error and its exact gradient (same layout as params).
LossGrad loss_and_grad(const ParamVector& params, const ModelArch& arch, Batch batch);

/// params - lr * direction.
ParamVector apply_update(const ParamVector& params, const ParamVector& direction, double lr);

// -- checkpoint format ---------------------------------------------------------
// <stem>.bin holds d little-endian IEEE-754 doubles; <stem>.json describes the
// segment layout.

void write_params(const ParamVector& params, const std::filesystem::path& stem);
ParamVector read_params(const std::filesystem::path& stem);

std::string layout_json(const ParamVector& params);
std::vector<char> encode_f64_le(std::span<const double> values);
std::vector<double> decode_f64_le(std::span<const char> bytes);

}  // namespace loadfl

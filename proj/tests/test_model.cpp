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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gradcheck.hpp"
#include "loadfl/error.hpp"
#include "loadfl/model.hpp"
#include "loadfl/rng.hpp"

namespace loadfl {
namespace {

ModelArch linear(std::size_t w) { return {ModelKind::kLinearAr, w, 16}; }
ModelArch mlp(std::size_t w, std::size_t h) { return {ModelKind::kMlp, w, h}; }

// Scalar-loop evaluation of v . tanh(Ux + c) + b, written without the
// library's segment helpers.
double mlp_reference(const std::vector<double>& p, std::size_t w, std::size_t h,
                     const double* x) {
  const double* U = p.data();
  const double* c = U + w * h;
  const double* v = c + h;
  const double b = v[h];
  double y = b;
  for (std::size_t j = 0; j < h; ++j) {
    double a = c[j];
    for (std::size_t i = 0; i < w; ++i) a += U[j * w + i] * x[i];
    y += v[j] * std::tanh(a);
  }
  return y;
}

TEST(Init, LinearIsZero) {
  const auto p = init_params(linear(48), 1);
  EXPECT_EQ(p.size(), 49u);
  for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST(Init, MlpShapeAndGlorotRange) {
  const auto arch = mlp(48, 16);
  const auto p = init_params(arch, 1);
  EXPECT_EQ(p.size(), 801u);
  EXPECT_EQ(arch.param_count(), 801u);
  const double limit_u = std::sqrt(6.0 / (48 + 16));
  for (double v : p.segment("U")) EXPECT_LE(std::abs(v), limit_u);
  const double limit_v = std::sqrt(6.0 / (16 + 1));
  for (double v : p.segment("v")) EXPECT_LE(std::abs(v), limit_v);
  for (double v : p.segment("c")) EXPECT_EQ(v, 0.0);
  for (double v : p.segment("b")) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(init_params(arch, 1), p);
  EXPECT_NE(init_params(arch, 2), p);
}

TEST(Layout, TilesVector) {
  const auto arch = mlp(5, 3);
  std::size_t at = 0;
  for (const auto& s : arch.layout()) {
    EXPECT_EQ(s.offset, at);
    at += s.size();
  }
  EXPECT_EQ(at, arch.param_count());
}

TEST(Forward, ZeroParams) {
  const auto arch = linear(3);
  const std::vector<double> x{1, 2, 3, 4, 5, 6}, y{0, 0};
  const auto out = forward(ParamVector(arch.layout()), arch, {3, x, y});
  EXPECT_EQ(out, (std::vector<double>{0, 0}));
}

TEST(Forward, UnitVectorProjection) {
  const auto arch = linear(3);
  ParamVector p(arch.layout());
  p.segment("w")[0] = 1.0;
  const std::vector<double> x{5, 7, 9}, y{0};
  EXPECT_EQ(forward(p, arch, {3, x, y})[0], 5.0);
}

TEST(Forward, MlpMatchesScalarLoop) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 1 + rng.below(10), h = 1 + rng.below(8), b = 1 + rng.below(5);
    const auto arch = mlp(w, h);
    ParamVector p(arch.layout());
    for (auto& v : p.values()) v = rng.normal();
    std::vector<double> x(b * w), y(b);
    for (auto& v : x) v = rng.normal();
    const auto out = forward(p, arch, {w, x, y});
    const std::vector<double> flat(p.values().begin(), p.values().end());
    for (std::size_t i = 0; i < b; ++i) {
      EXPECT_NEAR(out[i], mlp_reference(flat, w, h, x.data() + i * w), 1e-12);
    }
  }
}

TEST(Forward, DimensionMismatch) {
  const auto arch = linear(3);
  const std::vector<double> x{1, 2}, y{0};
  EXPECT_THROW(forward(ParamVector(arch.layout()), arch, {2, x, y}), Error);
  const auto other = linear(4);
  const std::vector<double> x3{1, 2, 3};
  EXPECT_THROW(forward(ParamVector(other.layout()), arch, {3, x3, y}), Error);
}

TEST(LossGrad, ZeroAtMinimum) {
  const auto arch = mlp(2, 2);
  const std::vector<double> x{1, 2}, y{0};
  const auto lg = loss_and_grad(ParamVector(arch.layout()), arch, {2, x, y});
  EXPECT_EQ(lg.loss, 0.0);
  for (double g : lg.grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(LossGrad, HandDerivative) {
  const auto arch = linear(1);
  const std::vector<double> x{1}, y{1};
  const auto lg = loss_and_grad(ParamVector(arch.layout()), arch, {1, x, y});
  EXPECT_EQ(lg.loss, 1.0);
  EXPECT_EQ(lg.grad.segment("b")[0], -2.0);
  EXPECT_EQ(lg.grad.segment("w")[0], -2.0);
  EXPECT_TRUE(lg.grad.same_layout(ParamVector(arch.layout())));
}

TEST(LossGrad, FiniteDifferenceOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = gradcheck::random_case(rng);
    EXPECT_EQ(gradcheck::mismatches(c), 0u) << "case " << trial;
  }
}

TEST(LossGrad, PureAndRepeatable) {
  Rng rng(2);
  const auto c = gradcheck::random_case(rng);
  const auto a = loss_and_grad(c.params, c.arch, c.batch());
  const auto b = loss_and_grad(c.params, c.arch, c.batch());
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grad, b.grad);
}

TEST(LossGrad, SmallStepDescendsForLinear) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 1 + rng.below(8), b = 2 + rng.below(20);
    const auto arch = linear(w);
    ParamVector p(arch.layout());
    for (auto& v : p.values()) v = rng.normal();
    std::vector<double> x(b * w), y(b);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const Batch batch{w, x, y};
    const auto lg = loss_and_grad(p, arch, batch);
    EXPECT_LE(loss(apply_update(p, lg.grad, 1e-3), arch, batch), lg.loss);
  }
}

TEST(ApplyUpdate, Arithmetic) {
  const auto arch = linear(2);
  const ParamVector zero(arch.layout());
  const auto ones = zero.filled(1.0);
  EXPECT_EQ(apply_update(ones, zero, 0.3), ones);
  const auto stepped = apply_update(zero, ones, 0.1);
  for (double v : stepped.values()) EXPECT_DOUBLE_EQ(v, -0.1);

  Rng rng(8);
  ParamVector p(arch.layout()), g(arch.layout());
  for (auto& v : p.values()) v = rng.normal();
  for (auto& v : g.values()) v = rng.normal();
  const auto minus_g = apply_update(zero, g, 1.0);
  const auto back = apply_update(apply_update(p, g, 0.37), minus_g, 0.37);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back[i], p[i], 1e-12);
  EXPECT_THROW(apply_update(p, ParamVector::flat({1.0}), 1.0), Error);
}

TEST(Checkpoint, RoundTrip) {
  const auto arch = mlp(4, 3);
  const auto p = init_params(arch, 5);
  const auto stem = std::filesystem::temp_directory_path() / "loadfl_ckpt";
  write_params(p, stem);
  EXPECT_EQ(std::filesystem::file_size(stem.string() + ".bin"), 8 * p.size());
  const auto q = read_params(stem);
  EXPECT_EQ(p, q);
  std::filesystem::remove(stem.string() + ".bin");
  std::filesystem::remove(stem.string() + ".json");
}

TEST(Checkpoint, LittleEndianBytes) {
  const std::vector<double> v{1.0};
  const auto bytes = encode_f64_le(v);
  ASSERT_EQ(bytes.size(), 8u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 0xF0);
  EXPECT_EQ(decode_f64_le(bytes), v);
}

TEST(ParamVector, FiniteCheck) {
  auto p = ParamVector::flat({1.0, 2.0});
  EXPECT_TRUE(p.all_finite());
  p[1] = std::nan("");
  EXPECT_FALSE(p.all_finite());
}

}  // namespace
}  // namespace loadfl

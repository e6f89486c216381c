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
#include <span>

#include "loadfl/data.hpp"

namespace loadfl {

struct MetricsReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mape_pct = 0.0;
  std::size_t n_samples = 0;
  /// Samples with |actual| <= kMapeZeroThreshold, left out of MAPE only.
  std::size_t n_excluded_zero_targets = 0;
};

inline constexpr double kMapeZeroThreshold = 1e-6;

/// Forecast errors on the denormalized scale.
MetricsReport metrics(std::span<const double> pred, std::span<const double> actual,
                      const Scaler& denorm);

// Bound calculators for the sign-aggregation convergence and robustness
// results. They evaluate the closed forms; they do not check that any
// simulated run respects them.

enum class Theorem1Reading {
  kPlusHalf,      // sqrt(L1) * (f0 - f* + 1/2)
  kHalfOptimum,   // sqrt(L1) * (f0 - f*/2)
};

/// (1/sqrt(N)) [sqrt(||L||_1)(f0 - f* + 1/2) + 2 ||sigma||_1] with N = K^2.
double theorem1_bound(double l1_norm_L, double f0, double fstar, double sigma_l1, std::size_t K,
                      Theorem1Reading reading = Theorem1Reading::kPlusHalf);

/// Data-poisoning deviation bound
///   (1 + L eta)^T [(1 + 2(t+1) delta / sqrt(n))^sqrt(n) + 1/sqrt(n)].
/// Requires delta_frac < 1/(8L(t+1)) and eta < 1/(4L).
double theorem2_bound(double L, double eta, std::size_t t, double delta_frac, std::size_t n,
                      std::size_t T);

/// Model-poisoning deviation bound
///   g^T delta0 + (2 M^2 eta / L) g^T sqrt(8 (t+1) ln(n) / n),  g = 1 + 2 M^2 eta t / n.
/// Requires t < n/4 and eta < 1/L.
double theorem3_bound(double M, double eta, std::size_t t, std::size_t n, double L,
                      std::size_t T, double delta0);

}  // namespace loadfl

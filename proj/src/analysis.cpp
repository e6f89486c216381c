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

#include "loadfl/analysis.hpp"

#include <cmath>
#include <string>

#include "loadfl/error.hpp"

namespace loadfl {
namespace {

[[noreturn]] void unsatisfied(const std::string& condition) {
  throw Error(ErrorKind::kPreconditionUnsatisfied, "violated: " + condition);
}

// (1 + x)^e without forming 1 + x in floating point.
double pow1p(double x, double e) { return std::exp(e * std::log1p(x)); }

}  // namespace

MetricsReport metrics(std::span<const double> pred, std::span<const double> actual,
                      const Scaler& denorm) {
  if (pred.size() != actual.size() || pred.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "pred has " + std::to_string(pred.size()) +
                                                " values, actual has " +
                                                std::to_string(actual.size()));
  }
  MetricsReport r;
  r.n_samples = pred.size();
  double se = 0.0, ape = 0.0;
  std::size_t included = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double yhat = denorm.denormalize(pred[i]);
    const double y = denorm.denormalize(actual[i]);
    const double e = yhat - y;
    se += e * e;
    if (std::fabs(y) > kMapeZeroThreshold) {
      ape += std::fabs(e) / std::fabs(y);
      ++included;
    }
  }
  if (included == 0) throw Error(ErrorKind::kAllTargetsZero, "every target is zero");
  r.n_excluded_zero_targets = pred.size() - included;
  r.mse = se / static_cast<double>(pred.size());
  r.rmse = std::sqrt(r.mse);
  r.mape_pct = 100.0 * ape / static_cast<double>(included);
  return r;
}

double theorem1_bound(double l1_norm_L, double f0, double fstar, double sigma_l1, std::size_t K,
                      Theorem1Reading reading) {
  if (K < 1) unsatisfied("K >= 1");
  if (!(l1_norm_L > 0.0)) unsatisfied("||L||_1 > 0");
  const double gap = reading == Theorem1Reading::kPlusHalf ? f0 - fstar + 0.5 : f0 - 0.5 * fstar;
  // N = K^2, so 1/sqrt(N) = 1/K.
  return (std::sqrt(l1_norm_L) * gap + 2.0 * sigma_l1) / static_cast<double>(K);
}

double theorem2_bound(double L, double eta, std::size_t t, double delta_frac, std::size_t n,
                      std::size_t T) {
  if (!(L > 0.0)) unsatisfied("L > 0");
  if (n < 1) unsatisfied("n >= 1");
  if (!(eta >= 0.0)) unsatisfied("eta >= 0");
  if (!(delta_frac >= 0.0)) unsatisfied("delta_frac >= 0");
  const double tp1 = static_cast<double>(t) + 1.0;
  if (!(delta_frac < 1.0 / (8.0 * L * tp1))) unsatisfied("delta_frac < 1/(8L(t+1))");
  if (!(eta < 1.0 / (4.0 * L))) unsatisfied("eta < 1/(4L)");
  const double rn = std::sqrt(static_cast<double>(n));
  const double growth = pow1p(L * eta, static_cast<double>(T));
  const double inner = pow1p(2.0 * tp1 * delta_frac / rn, rn) + 1.0 / rn;
  return growth * inner;
}

double theorem3_bound(double M, double eta, std::size_t t, std::size_t n, double L,
                      std::size_t T, double delta0) {
  if (!(L > 0.0)) unsatisfied("L > 0");
  if (n < 1) unsatisfied("n >= 1");
  if (!(eta >= 0.0)) unsatisfied("eta >= 0");
  if (!(4 * t < n)) unsatisfied("t < n/4");
  if (!(eta < 1.0 / L)) unsatisfied("eta < 1/L");
  const double nd = static_cast<double>(n);
  const double m2eta = 2.0 * M * M * eta;
  const double growth = pow1p(m2eta * static_cast<double>(t) / nd, static_cast<double>(T));
  const double tail =
      std::sqrt(8.0 * (static_cast<double>(t) + 1.0) * std::log(nd) / nd);
  return growth * delta0 + (m2eta / L) * growth * tail;
}

}  // namespace loadfl

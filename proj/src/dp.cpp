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

#include "loadfl/dp.hpp"

#include <cmath>

#include "loadfl/error.hpp"

namespace loadfl {

void PrivacyBudget::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::kBudgetOutOfRange,
                "epsilon = " + std::to_string(epsilon) + " outside (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::kBudgetOutOfRange,
                "delta = " + std::to_string(delta) + " outside (0, 1)");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorKind::kBudgetOutOfRange, "sensitivity must be positive");
  }
}

double gaussian_sigma(const PrivacyBudget& budget) {
  budget.validate();
  const double c = std::sqrt(2.0 * std::log(1.25 / budget.delta));
  return c * budget.sensitivity / budget.epsilon;
}

ParamVector perturb(const ParamVector& v, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::kInvalidArgument, "sigma must be finite and >= 0");
  }
  ParamVector out = v;
  if (sigma == 0.0) return out;
  for (double& x : out.values()) x += sigma * rng.normal();
  return out;
}

}  // namespace loadfl

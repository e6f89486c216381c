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

#include "loadfl/model.hpp"
#include "loadfl/rng.hpp"

namespace loadfl {

/// (epsilon, delta) budget of one Gaussian-mechanism release.
struct PrivacyBudget {
  double epsilon = 0.5;
  double delta = 1e-5;
  /// Per-coordinate sensitivity. A sign coordinate can move from -1 to +1.
  double sensitivity = 2.0;

  /// Throws BudgetOutOfRange.
  void validate() const;
};

/// Smallest compliant noise scale: sqrt(2 ln(1.25/delta)) * sensitivity / epsilon.
double gaussian_sigma(const PrivacyBudget& budget);

/// v + N(0, sigma^2) per coordinate. Coordinate i consumes exactly one draw of
/// `rng`, in order, so a stream positioned at offset k perturbs the tail of a
/// vector exactly as the full-vector call would.
ParamVector perturb(const ParamVector& v, double sigma, Rng& rng);

}  // namespace loadfl

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

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace loadfl {

/// Counter-based pseudo random stream.
///
/// Draw i of a stream is a pure function of (key, i), so a stream can be
/// split into independent substreams by tag and positioned anywhere without
/// generating the prefix. Everything seeded in the library goes through this
/// type; it does not depend on any implementation-defined std:: distribution,
/// so results are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream derived from this one's key and `tag`. Does not
  /// advance this stream.
  Rng substream(std::uint64_t tag) const;
  Rng substream(std::initializer_list<std::uint64_t> tags) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Standard normal via the inverse CDF of uniform_open().
  double normal();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t position() const { return counter_; }
  void seek(std::uint64_t position) { counter_ = position; }
  std::uint64_t key() const { return key_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative).
double inverse_normal_cdf(double p);

/// Fisher-Yates permutation of 0..n-1 drawn from `rng`.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace loadfl

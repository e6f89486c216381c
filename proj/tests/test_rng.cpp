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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "loadfl/rng.hpp"

namespace loadfl {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentSeedsDiffer) {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_EQ(same, 0);
}

TEST(Rng, SubstreamsAreIndependentOfParentPosition) {
  Rng a(7);
  const Rng s1 = a.substream(3);
  a.next_u64();
  a.next_u64();
  Rng s2 = a.substream(3);
  Rng s1c = s1;
  for (int i = 0; i < 20; ++i) EXPECT_EQ(s1c.next_u64(), s2.next_u64());
  EXPECT_NE(a.substream(3).next_u64(), a.substream(4).next_u64());
  EXPECT_NE(a.substream({1, 2}).next_u64(), a.substream({2, 1}).next_u64());
}

TEST(Rng, SeekReproducesDraw) {
  Rng a(9);
  std::vector<std::uint64_t> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(a.next_u64());
  Rng b(9);
  b.seek(6);
  EXPECT_EQ(b.next_u64(), xs[6]);
}

TEST(Rng, UniformRange) {
  Rng a(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double o = a.uniform_open();
    ASSERT_GT(o, 0.0);
    ASSERT_LT(o, 1.0);
  }
}

TEST(Rng, BelowIsUnbiasedEnough) {
  Rng a(11);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[a.below(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7, 5 * std::sqrt(n / 7.0));
}

TEST(Rng, NormalMoments) {
  Rng a(13);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = a.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.05);
}

TEST(InverseNormalCdf, KnownQuantiles) {
  EXPECT_NEAR(inverse_normal_cdf(0.5), 0.0, 1e-15);
  EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-13);
  EXPECT_NEAR(inverse_normal_cdf(0.025), -1.959963984540054, 1e-13);
  EXPECT_NEAR(inverse_normal_cdf(1e-10), -6.361340902404056, 1e-11);
}

TEST(InverseNormalCdf, InvertsErfc) {
  for (double z = -6.0; z <= 6.0; z += 0.37) {
    const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
    EXPECT_NEAR(inverse_normal_cdf(p), z, 1e-9 * std::max(1.0, std::abs(z)));
  }
}

TEST(RandomPermutation, IsBijection) {
  Rng a(17);
  for (std::size_t n : {0u, 1u, 2u, 10u, 257u}) {
    auto p = random_permutation(n, a);
    ASSERT_EQ(p.size(), n);
    std::sort(p.begin(), p.end());
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_EQ(p, id);
  }
}

TEST(RandomPermutation, AllOrdersOfThreeAppear) {
  Rng a(19);
  std::set<std::vector<std::size_t>> seen;
  for (int i = 0; i < 600; ++i) seen.insert(random_permutation(3, a));
  EXPECT_EQ(seen.size(), 6u);
}

}  // namespace
}  // namespace loadfl

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
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "loadfl/data.hpp"
#include "loadfl/error.hpp"
#include "loadfl/rng.hpp"
#include "oracles.hpp"

namespace loadfl {
namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

SupervisedSet numbered(std::size_t n, double base = 0.0) {
  SupervisedSet s;
  s.window = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = base + static_cast<double>(i);
    s.push_back(std::span<const double>(&x, 1), x);
  }
  return s;
}

TEST(Timestamp, RoundTrip) {
  const auto t = parse_timestamp("2012-07-01 00:30");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_timestamp(*t), "2012-07-01 00:30");
  EXPECT_EQ(*parse_timestamp("1970-01-01 00:00"), 0);
  EXPECT_EQ(*parse_timestamp("2012-03-01 00:00") - *parse_timestamp("2012-02-28 00:00"), 2 * 1440);
  EXPECT_EQ(format_timestamp(-30), "1969-12-31 23:30");
}

TEST(Timestamp, RejectsMalformed) {
  for (const char* s : {"", "2012-07-01", "2012-13-01 00:00", "2013-02-29 00:00",
                        "2012-07-01 24:00", "2012-07-01 00:60", "x012-07-01 00:00"}) {
    EXPECT_FALSE(parse_timestamp(s)) << s;
  }
  EXPECT_TRUE(parse_timestamp("2012-02-29 23:59"));
}

TEST(Csv, FiltersByCategory) {
  std::istringstream in(
      "customer_id,category,timestamp,kwh\n"
      "A,GC,2012-07-01 00:00,1.0\n"
      "A,GC,2012-07-01 00:30,2.0\n"
      "B,CL,2012-07-01 00:00,3.0\n"
      "B,CL,2012-07-01 00:30,4.0\n");
  const auto s = read_load_csv(in, "GC");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].customer_id, "A");
  EXPECT_EQ(s[0].values, (std::vector<double>{1.0, 2.0}));
}

TEST(Csv, SortsByTimestamp) {
  std::istringstream in(
      "customer_id,category,timestamp,kwh\n"
      "A,GC,2012-07-01 01:00,3\n"
      "A,GC,2012-07-01 00:00,1\n"
      "A,GC,2012-07-01 00:30,2\n");
  const auto s = read_load_csv(in, "GC");
  EXPECT_EQ(s[0].values, (std::vector<double>{1, 2, 3}));
}

TEST(Csv, ManyCustomers) {
  std::ostringstream out;
  SynthConfig cfg;
  cfg.n_customers = 300;
  cfg.days = 1;
  write_load_csv(out, synth_generate(cfg));
  std::istringstream in(out.str());
  EXPECT_EQ(read_load_csv(in, "GC").size(), 300u);
}

TEST(Csv, DuplicateTimestamp) {
  std::istringstream in(
      "customer_id,category,timestamp,kwh\n"
      "A,GC,2012-07-01 00:00,1\n"
      "A,GC,2012-07-01 00:30,2\n"
      "A,GC,2012-07-01 00:30,2\n"
      "A,GC,2012-07-01 01:00,3\n");
  EXPECT_EQ(kind_of([&] { read_load_csv(in, "GC"); }), ErrorKind::kNonMonotonicTimestamps);
}

TEST(Csv, GapIsRejected) {
  std::istringstream in(
      "customer_id,category,timestamp,kwh\n"
      "A,GC,2012-07-01 00:00,1\n"
      "A,GC,2012-07-01 01:00,2\n");
  EXPECT_EQ(kind_of([&] { read_load_csv(in, "GC"); }), ErrorKind::kNonMonotonicTimestamps);
}

TEST(Csv, MalformedRowCarriesLineNumber) {
  std::istringstream in(
      "customer_id,category,timestamp,kwh\n"
      "A,GC,2012-07-01 00:00,1\n"
      "A,GC,2012-07-01 00:30,abc\n");
  try {
    read_load_csv(in, "GC");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMalformedRow);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Csv, OtherMalformedRows) {
  for (const char* row : {"A,GC,2012-07-01 00:00", "A,GC,bad,1", "A,GC,2012-07-01 00:00,-1",
                          ",GC,2012-07-01 00:00,1"}) {
    std::istringstream in(std::string(kCsvHeader) + "\n" + row + "\n");
    EXPECT_EQ(kind_of([&] { read_load_csv(in, "GC"); }), ErrorKind::kMalformedRow) << row;
  }
  std::istringstream no_header("A,GC,2012-07-01 00:00,1\n");
  EXPECT_EQ(kind_of([&] { read_load_csv(no_header, "GC"); }), ErrorKind::kMalformedRow);
}

TEST(Csv, EmptyResult) {
  std::istringstream in("customer_id,category,timestamp,kwh\nA,CL,2012-07-01 00:00,1\n");
  EXPECT_EQ(kind_of([&] { read_load_csv(in, "GC"); }), ErrorKind::kEmptyResult);
}

TEST(Csv, MissingFile) {
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/file.csv", "GC"); }), ErrorKind::kIo);
}

TEST(Csv, WriteReadRoundTrip) {
  SynthConfig cfg;
  cfg.n_customers = 3;
  cfg.days = 2;
  const auto a = synth_generate(cfg);
  const auto path = std::filesystem::temp_directory_path() / "loadfl_test_roundtrip.csv";
  {
    std::ofstream out(path);
    write_load_csv(out, a);
  }
  const auto b = load_csv(path, "GC");
  std::filesystem::remove(path);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].customer_id, b[i].customer_id);
    EXPECT_EQ(a[i].timestamps, b[i].timestamps);
    EXPECT_EQ(a[i].values, b[i].values);
  }
}

TEST(Synth, ConstantSignal) {
  SynthConfig cfg;
  cfg.noise_std = 0;
  cfg.daily_amp = 0;
  cfg.weekly_amp = 0;
  cfg.base_kw = 1;
  for (const auto& s : synth_generate(cfg)) {
    for (double v : s.values) EXPECT_EQ(v, 1.0);
  }
}

TEST(Synth, ShapeAndDeterminism) {
  SynthConfig cfg;
  cfg.days = 2;
  cfg.n_customers = 4;
  const auto a = synth_generate(cfg);
  ASSERT_EQ(a.size(), 4u);
  for (const auto& s : a) {
    EXPECT_EQ(s.size(), 96u);
    for (double v : s.values) EXPECT_GE(v, 0.0);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_EQ(s.timestamps[i] - s.timestamps[i - 1], 30);
  }
  const auto b = synth_generate(cfg);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].values, b[i].values);
  cfg.seed = 2;
  EXPECT_NE(synth_generate(cfg)[0].values, a[0].values);
}

TEST(Synth, InvalidConfig) {
  SynthConfig cfg;
  cfg.days = 0;
  EXPECT_EQ(kind_of([&] { synth_generate(cfg); }), ErrorKind::kConfig);
  cfg = {};
  cfg.noise_std = -1;
  EXPECT_EQ(kind_of([&] { synth_generate(cfg); }), ErrorKind::kConfig);
  cfg = {};
  cfg.n_customers = 0;
  EXPECT_EQ(kind_of([&] { synth_generate(cfg); }), ErrorKind::kConfig);
}

TEST(Windows, HandExample) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = make_windows(v, 2, Scaler{0, 1});
  EXPECT_EQ(s.inputs, (std::vector<double>{1, 2, 2, 3}));
  EXPECT_EQ(s.targets, (std::vector<double>{3, 4}));
}

TEST(Windows, Boundary) {
  const std::vector<double> v{1, 2, 3};
  EXPECT_EQ(make_windows(v, 2).size(), 1u);
  EXPECT_EQ(kind_of([&] { make_windows(v, 3); }), ErrorKind::kSeriesTooShort);
  const std::vector<double> c{5, 5, 5, 5};
  EXPECT_EQ(kind_of([&] { make_windows(c, 2); }), ErrorKind::kZeroVariance);
}

TEST(Windows, MatchesEnumerationOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 2 + rng.below(30);
    const std::size_t w = 1 + rng.below(len - 1);
    std::vector<double> v(len);
    for (auto& x : v) x = rng.normal();
    const Scaler sc{rng.normal(), 0.5 + rng.uniform()};
    const auto got = make_windows(v, w, sc);

    std::vector<double> nv(len);
    for (std::size_t i = 0; i < len; ++i) nv[i] = (v[i] - sc.mean) / sc.std;
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    oracle::windows(nv, w, xs, ys);
    ASSERT_EQ(got.size(), ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const auto row = got.row(i);
      ASSERT_TRUE(std::equal(row.begin(), row.end(), xs[i].begin()));
      ASSERT_EQ(got.targets[i], ys[i]);
    }
  }
}

TEST(Scaler, RoundTrip) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Scaler sc{rng.normal() * 10, 0.01 + rng.uniform() * 5};
    const double x = rng.normal() * 100;
    EXPECT_NEAR(sc.denormalize(sc.normalize(x)), x, 1e-9 * std::max(1.0, std::abs(x)));
  }
}

TEST(Scaler, PopulationMoments) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = fit_scaler(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
}

TEST(Split, SevenThree) {
  const auto [tr, te] = split_train_test(numbered(10), 0.7);
  EXPECT_EQ(tr.size(), 7u);
  EXPECT_EQ(te.size(), 3u);
}

TEST(Split, Degenerate) {
  EXPECT_EQ(kind_of([] { split_train_test(numbered(2), 0.7); }), ErrorKind::kDegenerateSplit);
  EXPECT_EQ(kind_of([] { split_train_test(SupervisedSet{}, 0.7); }), ErrorKind::kDegenerateSplit);
}

TEST(Split, ChronologicalOrder) {
  const auto [tr, te] = split_train_test(numbered(100), 0.7);
  ASSERT_EQ(tr.size(), 70u);
  for (std::size_t i = 0; i < 70; ++i) EXPECT_EQ(tr.targets[i], static_cast<double>(i));
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(te.targets[i], static_cast<double>(70 + i));
}

TEST(Partition, EqualShares) {
  const std::vector<SupervisedSet> sets{numbered(100)};
  const auto shards = partition_clients(sets, {}, 10, 1);
  ASSERT_EQ(shards.size(), 10u);
  for (const auto& s : shards) EXPECT_EQ(s.train.size(), 10u);
}

TEST(Partition, RemainderSizes) {
  const std::vector<SupervisedSet> sets{numbered(7)};
  const auto shards = partition_clients(sets, {}, 3, 9);
  std::vector<std::size_t> sizes;
  for (const auto& s : shards) sizes.push_back(s.train.size());
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 3}));
}

TEST(Partition, IsBijectionAndDeterministic) {
  const std::vector<SupervisedSet> train{numbered(37), numbered(20, 100)};
  const std::vector<SupervisedSet> test{numbered(13, 1000)};
  const auto a = partition_clients(train, test, 4, 77);
  const auto b = partition_clients(train, test, 4, 77);
  std::multiset<double> seen_train, seen_test;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].client_id, k);
    EXPECT_EQ(a[k].train.targets, b[k].train.targets);
    EXPECT_EQ(a[k].test.targets, b[k].test.targets);
    for (std::size_t i = 0; i < a[k].train.size(); ++i) {
      EXPECT_EQ(a[k].train.row(i)[0], a[k].train.targets[i]);
      seen_train.insert(a[k].train.targets[i]);
    }
    seen_test.insert(a[k].test.targets.begin(), a[k].test.targets.end());
  }
  std::multiset<double> want_train, want_test;
  for (const auto& s : train) want_train.insert(s.targets.begin(), s.targets.end());
  for (const auto& s : test) want_test.insert(s.targets.begin(), s.targets.end());
  EXPECT_EQ(seen_train, want_train);
  EXPECT_EQ(seen_test, want_test);

  const auto c = partition_clients(train, test, 4, 78);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) differs |= a[k].train.targets != c[k].train.targets;
  EXPECT_TRUE(differs);
}

TEST(Partition, TooFewSamples) {
  const std::vector<SupervisedSet> sets{numbered(3)};
  EXPECT_EQ(kind_of([&] { partition_clients(sets, {}, 4, 1); }), ErrorKind::kTooFewSamples);
}

TEST(Prepare, ScalerUsesTrainingPrefixOnly) {
  SynthConfig cfg;
  cfg.n_customers = 3;
  cfg.days = 4;
  auto series = synth_generate(cfg);
  const auto a = prepare_federated_data(series, 48, 0.7, 3, 1);
  // Inflating the final (test-only) values must not move the scaler.
  for (auto& s : series) s.values.back() += 1000.0;
  const auto b = prepare_federated_data(series, 48, 0.7, 3, 1);
  EXPECT_EQ(a.scaler, b.scaler);
  std::size_t train = 0, test = 0;
  for (const auto& s : a.shards) {
    train += s.train.size();
    test += s.test.size();
    EXPECT_EQ(s.train.window, 48u);
  }
  const std::size_t per = 4 * 48 - 48;
  EXPECT_EQ(train, 3 * train_count(per, 0.7));
  EXPECT_EQ(train + test, 3 * per);
}

}  // namespace
}  // namespace loadfl

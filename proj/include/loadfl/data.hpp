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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace loadfl {

/// Minutes since 1970-01-01 00:00 (local wall-clock, no time zone).
using Minutes = std::int64_t;

inline constexpr Minutes kHalfHour = 30;
inline constexpr std::size_t kIntervalsPerDay = 48;

/// Half-hourly energy readings of one customer.
struct LoadSeries {
  std::string customer_id;
  std::vector<Minutes> timestamps;
  std::vector<double> values;  // kWh per interval

  std::size_t size() const { return values.size(); }
};

/// z-score normalization parameters.
struct Scaler {
  double mean = 0.0;
  double std = 1.0;

  double normalize(double x) const { return (x - mean) / std; }
  double denormalize(double z) const { return z * std + mean; }
  bool operator==(const Scaler&) const = default;
};

/// Lag-window samples. `inputs` is row-major with `window` columns.
struct SupervisedSet {
  std::size_t window = 0;
  std::vector<double> inputs;
  std::vector<double> targets;
  Scaler scaler;

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {inputs.data() + i * window, window};
  }
  std::span<double> row(std::size_t i) { return {inputs.data() + i * window, window}; }
  void push_back(std::span<const double> x, double target);
};

enum class Role { kHonest, kPoisoned, kModelAttacker, kColluder };

std::string_view to_string(Role role);

struct ClientShard {
  std::size_t client_id = 0;
  SupervisedSet train;
  SupervisedSet test;
  Role role = Role::kHonest;
};

/// Parameters of the synthetic load generator.
struct SynthConfig {
  std::size_t n_customers = 10;
  std::size_t days = 28;
  double base_kw = 1.0;
  double daily_amp = 0.5;
  double weekly_amp = 0.2;
  double noise_std = 0.1;
  std::uint64_t seed = 1;

  /// Throws Error(kConfig) when an invariant is violated.
  void validate() const;
};

// -- timestamps ---------------------------------------------------------------

/// Parses `YYYY-MM-DD HH:MM`. Returns nullopt on malformed input.
std::optional<Minutes> parse_timestamp(std::string_view text);
std::string format_timestamp(Minutes t);

// -- CSV ----------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "customer_id,category,timestamp,kwh";

/// Reads the long-format load CSV and keeps customers whose category equals
/// `category_filter`. Series come back ordered by customer id, each sorted by
/// timestamp.
std::vector<LoadSeries> read_load_csv(std::istream& in, std::string_view category_filter);
std::vector<LoadSeries> load_csv(const std::filesystem::path& path,
                                 std::string_view category_filter);

/// Writes series in the same schema, tagging every row with `category`.
void write_load_csv(std::ostream& out, std::span<const LoadSeries> series,
                    std::string_view category = "GC");

// -- synthesis and windowing --------------------------------------------------

/// value = base + daily*sin(2*pi*hour/24) + weekly*sin(2*pi*dow/7) + N(0, noise^2),
/// clamped at zero. Starts at 2012-07-01 00:00.
std::vector<LoadSeries> synth_generate(const SynthConfig& cfg);

/// Population mean and standard deviation. Throws ZeroVariance when std == 0.
Scaler fit_scaler(std::span<const double> values);

SupervisedSet make_windows(std::span<const double> values, std::size_t window,
                           std::optional<Scaler> scaler = std::nullopt);
SupervisedSet make_windows(const LoadSeries& series, std::size_t window,
                           std::optional<Scaler> scaler = std::nullopt);

/// Number of leading samples that go to the training side.
std::size_t train_count(std::size_t n_samples, double train_frac);

/// Chronological split; both halves keep `s.scaler`.
std::pair<SupervisedSet, SupervisedSet> split_train_test(const SupervisedSet& s,
                                                         double train_frac);

/// Pools the samples of all sets, permutes them with `seed`, and deals them
/// round-robin to `n_clients` shards. Train and test pools are dealt
/// independently. All sets must share one scaler and window.
std::vector<ClientShard> partition_clients(std::span<const SupervisedSet> train_sets,
                                           std::span<const SupervisedSet> test_sets,
                                           std::size_t n_clients, std::uint64_t seed);

/// Concatenation of sets with identical window and scaler.
SupervisedSet concat(std::span<const SupervisedSet> sets);

/// End-to-end preparation used by the simulator: one train-only scaler is
/// fit over the training prefix of every series, each series is windowed and
/// split chronologically, and the pooled samples are partitioned.
struct FederatedData {
  std::vector<ClientShard> shards;
  Scaler scaler;
  std::size_t window = 0;
};

FederatedData prepare_federated_data(std::span<const LoadSeries> series, std::size_t window,
                                     double train_frac, std::size_t n_clients,
                                     std::uint64_t seed);

}  // namespace loadfl

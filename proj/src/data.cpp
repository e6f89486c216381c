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

#include "loadfl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "loadfl/error.hpp"
#include "loadfl/rng.hpp"

namespace loadfl {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  // from_chars for double is available in libstdc++ 11.
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

void require_same_shape(const SupervisedSet& a, const SupervisedSet& b) {
  if (a.window != b.window) {
    throw Error(ErrorKind::kDimensionMismatch, "sets have different window lengths");
  }
  if (!(a.scaler == b.scaler)) {
    throw Error(ErrorKind::kInvalidArgument, "sets were normalized with different scalers");
  }
}

void deal_round_robin(std::span<const SupervisedSet> sets, std::size_t n_clients, Rng rng,
                      std::vector<ClientShard>& shards, bool train_side) {
  const SupervisedSet pooled = concat(sets);
  const auto perm = random_permutation(pooled.size(), rng);
  for (auto& shard : shards) {
    auto& dst = train_side ? shard.train : shard.test;
    dst.window = pooled.window;
    dst.scaler = pooled.scaler;
  }
  for (std::size_t i = 0; i < perm.size(); ++i) {
    auto& dst = train_side ? shards[i % n_clients].train : shards[i % n_clients].test;
    dst.push_back(pooled.row(perm[i]), pooled.targets[perm[i]]);
  }
}

}  // namespace

void SupervisedSet::push_back(std::span<const double> x, double target) {
  if (x.size() != window) {
    throw Error(ErrorKind::kDimensionMismatch, "sample width differs from window");
  }
  inputs.insert(inputs.end(), x.begin(), x.end());
  targets.push_back(target);
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kHonest: return "honest";
    case Role::kPoisoned: return "poisoned";
    case Role::kModelAttacker: return "model_attacker";
    case Role::kColluder: return "colluder";
  }
  return "unknown";
}

void SynthConfig::validate() const {
  if (n_customers == 0) throw Error(ErrorKind::kConfig, "synth.n_customers must be positive");
  if (days < 1) throw Error(ErrorKind::kConfig, "synth.days must be >= 1");
  if (!(base_kw > 0.0)) throw Error(ErrorKind::kConfig, "synth.base_kw must be positive");
  if (!(noise_std >= 0.0)) throw Error(ErrorKind::kConfig, "synth.noise_std must be >= 0");
  if (!std::isfinite(daily_amp) || !std::isfinite(weekly_amp)) {
    throw Error(ErrorKind::kConfig, "synth amplitudes must be finite");
  }
}

std::optional<Minutes> parse_timestamp(std::string_view text) {
  // YYYY-MM-DD HH:MM
  if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != ' ' ||
      text[13] != ':') {
    return std::nullopt;
  }
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi)) {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59) return std::nullopt;
  static constexpr unsigned kDaysIn[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (d > kDaysIn[mo - 1] || (mo == 2 && d == 29 && !leap)) return std::nullopt;
  return days_from_civil(y, mo, d) * 1440 + h * 60 + mi;
}

std::string format_timestamp(Minutes t) {
  std::int64_t days = t >= 0 ? t / 1440 : (t - 1439) / 1440;
  const auto minute_of_day = static_cast<unsigned>(t - days * 1440);
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02u:%02u", static_cast<long long>(y), m, d,
                minute_of_day / 60, minute_of_day % 60);
  return buf;
}

std::vector<LoadSeries> read_load_csv(std::istream& in, std::string_view category_filter) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kMalformedRow, "line 1: missing header");
  }
  ++line_no;
  if (trim(line) != kCsvHeader) {
    throw Error(ErrorKind::kMalformedRow,
                "line 1: expected header '" + std::string(kCsvHeader) + "'");
  }

  std::map<std::string, std::vector<std::pair<Minutes, double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const auto bad = [&](const std::string& why) {
      return Error(ErrorKind::kMalformedRow, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) throw bad("expected 4 fields");
    if (fields[0].empty()) throw bad("empty customer_id");
    const auto ts = parse_timestamp(fields[2]);
    if (!ts) throw bad("bad timestamp '" + std::string(fields[2]) + "'");
    double kwh = 0.0;
    if (!parse_double(fields[3], kwh) || kwh < 0.0) {
      throw bad("bad kwh '" + std::string(fields[3]) + "'");
    }
    if (fields[1] != category_filter) continue;
    rows[std::string(fields[0])].emplace_back(*ts, kwh);
  }

  if (rows.empty()) {
    throw Error(ErrorKind::kEmptyResult,
                "no customer matches category '" + std::string(category_filter) + "'");
  }

  std::vector<LoadSeries> out;
  out.reserve(rows.size());
  for (auto& [id, samples] : rows) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    LoadSeries s;
    s.customer_id = id;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i > 0 && samples[i].first - samples[i - 1].first != kHalfHour) {
        throw Error(ErrorKind::kNonMonotonicTimestamps,
                    "customer " + id + " at " + format_timestamp(samples[i].first));
      }
      s.timestamps.push_back(samples[i].first);
      s.values.push_back(samples[i].second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LoadSeries> load_csv(const std::filesystem::path& path,
                                 std::string_view category_filter) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_load_csv(in, category_filter);
}

void write_load_csv(std::ostream& out, std::span<const LoadSeries> series,
                    std::string_view category) {
  out << kCsvHeader << '\n';
  char buf[64];
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      // Shortest round-trip representation keeps files byte-stable.
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, s.values[i]);
      out << s.customer_id << ',' << category << ',' << format_timestamp(s.timestamps[i]) << ','
          << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
    }
  }
}

std::vector<LoadSeries> synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const Minutes start = *parse_timestamp("2012-07-01 00:00");
  const std::size_t n = cfg.days * kIntervalsPerDay;
  const Rng root(cfg.seed);
  std::vector<LoadSeries> out(cfg.n_customers);
  for (std::size_t c = 0; c < cfg.n_customers; ++c) {
    auto& s = out[c];
    char id[32];
    std::snprintf(id, sizeof id, "C%04zu", c + 1);
    s.customer_id = id;
    s.timestamps.resize(n);
    s.values.resize(n);
    Rng rng = root.substream(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double hour = static_cast<double>(i % kIntervalsPerDay) / 2.0;
      const double dow = static_cast<double>((i / kIntervalsPerDay) % 7);
      double v = cfg.base_kw + cfg.daily_amp * std::sin(2.0 * std::numbers::pi * hour / 24.0) +
                 cfg.weekly_amp * std::sin(2.0 * std::numbers::pi * dow / 7.0);
      if (cfg.noise_std > 0.0) v += cfg.noise_std * rng.normal();
      s.timestamps[i] = start + static_cast<Minutes>(i) * kHalfHour;
      s.values[i] = std::max(v, 0.0);
    }
  }
  return out;
}

Scaler fit_scaler(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kSeriesTooShort, "cannot fit scaler on no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw Error(ErrorKind::kZeroVariance, "series has zero variance");
  return {mean, sd};
}

SupervisedSet make_windows(std::span<const double> values, std::size_t window,
                           std::optional<Scaler> scaler) {
  if (window == 0) throw Error(ErrorKind::kInvalidArgument, "window must be positive");
  if (values.size() <= window) {
    throw Error(ErrorKind::kSeriesTooShort, "series length " + std::to_string(values.size()) +
                                                " <= window " + std::to_string(window));
  }
  const Scaler sc = scaler ? *scaler : fit_scaler(values);
  if (!(sc.std > 0.0)) throw Error(ErrorKind::kZeroVariance, "scaler std must be positive");

  SupervisedSet out;
  out.window = window;
  out.scaler = sc;
  const std::size_t n = values.size() - window;
  out.inputs.resize(n * window);
  out.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < window; ++j) {
      out.inputs[i * window + j] = sc.normalize(values[i + j]);
    }
    out.targets[i] = sc.normalize(values[i + window]);
  }
  return out;
}

SupervisedSet make_windows(const LoadSeries& series, std::size_t window,
                           std::optional<Scaler> scaler) {
  return make_windows(std::span<const double>(series.values), window, scaler);
}

std::size_t train_count(std::size_t n_samples, double train_frac) {
  // The epsilon keeps products like 0.7 * 10 from ceiling to 8.
  return static_cast<std::size_t>(std::ceil(train_frac * static_cast<double>(n_samples) - 1e-9));
}

std::pair<SupervisedSet, SupervisedSet> split_train_test(const SupervisedSet& s,
                                                         double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "train_frac must lie in (0, 1)");
  }
  if (s.empty()) throw Error(ErrorKind::kDegenerateSplit, "empty sample set");
  const std::size_t n_train = train_count(s.size(), train_frac);
  if (n_train == 0 || n_train >= s.size()) {
    throw Error(ErrorKind::kDegenerateSplit,
                std::to_string(s.size()) + " samples leave one side empty");
  }
  SupervisedSet train, test;
  train.window = test.window = s.window;
  train.scaler = test.scaler = s.scaler;
  const auto cut = static_cast<std::ptrdiff_t>(n_train * s.window);
  train.inputs.assign(s.inputs.begin(), s.inputs.begin() + cut);
  test.inputs.assign(s.inputs.begin() + cut, s.inputs.end());
  train.targets.assign(s.targets.begin(), s.targets.begin() + static_cast<std::ptrdiff_t>(n_train));
  test.targets.assign(s.targets.begin() + static_cast<std::ptrdiff_t>(n_train), s.targets.end());
  return {std::move(train), std::move(test)};
}

SupervisedSet concat(std::span<const SupervisedSet> sets) {
  SupervisedSet out;
  if (sets.empty()) return out;
  out.window = sets.front().window;
  out.scaler = sets.front().scaler;
  for (const auto& s : sets) {
    require_same_shape(sets.front(), s);
    out.inputs.insert(out.inputs.end(), s.inputs.begin(), s.inputs.end());
    out.targets.insert(out.targets.end(), s.targets.begin(), s.targets.end());
  }
  return out;
}

std::vector<ClientShard> partition_clients(std::span<const SupervisedSet> train_sets,
                                           std::span<const SupervisedSet> test_sets,
                                           std::size_t n_clients, std::uint64_t seed) {
  if (n_clients == 0) throw Error(ErrorKind::kInvalidArgument, "n_clients must be positive");
  std::size_t n_train = 0, n_test = 0;
  for (const auto& s : train_sets) n_train += s.size();
  for (const auto& s : test_sets) n_test += s.size();
  if (n_train < n_clients) {
    throw Error(ErrorKind::kTooFewSamples, std::to_string(n_train) + " training samples for " +
                                               std::to_string(n_clients) + " clients");
  }
  if (n_test > 0 && n_test < n_clients) {
    throw Error(ErrorKind::kTooFewSamples, std::to_string(n_test) + " test samples for " +
                                               std::to_string(n_clients) + " clients");
  }
  if (!train_sets.empty() && !test_sets.empty()) {
    require_same_shape(train_sets.front(), test_sets.front());
  }

  std::vector<ClientShard> shards(n_clients);
  for (std::size_t k = 0; k < n_clients; ++k) shards[k].client_id = k;
  const Rng root(seed);
  deal_round_robin(train_sets, n_clients, root.substream(1), shards, true);
  if (n_test > 0) deal_round_robin(test_sets, n_clients, root.substream(2), shards, false);
  return shards;
}

FederatedData prepare_federated_data(std::span<const LoadSeries> series, std::size_t window,
                                     double train_frac, std::size_t n_clients,
                                     std::uint64_t seed) {
  if (series.empty()) throw Error(ErrorKind::kEmptyResult, "no series to prepare");
  std::vector<double> train_values;
  for (const auto& s : series) {
    if (s.size() <= window) {
      throw Error(ErrorKind::kSeriesTooShort, "customer " + s.customer_id + " has " +
                                                  std::to_string(s.size()) + " points");
    }
    const std::size_t n_train = train_count(s.size() - window, train_frac);
    const std::size_t upto = std::min(s.size(), n_train + window);
    train_values.insert(train_values.end(), s.values.begin(),
                        s.values.begin() + static_cast<std::ptrdiff_t>(upto));
  }
  FederatedData out;
  out.window = window;
  out.scaler = fit_scaler(train_values);

  std::vector<SupervisedSet> trains, tests;
  for (const auto& s : series) {
    auto [train, test] = split_train_test(make_windows(s, window, out.scaler), train_frac);
    trains.push_back(std::move(train));
    tests.push_back(std::move(test));
  }
  out.shards = partition_clients(trains, tests, n_clients, seed);
  return out;
}

}  // namespace loadfl

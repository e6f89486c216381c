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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadfl/attacks.hpp"
#include "loadfl/data.hpp"
#include "loadfl/fed.hpp"

namespace loadfl {

using Json = nlohmann::ordered_json;

enum class DataSource { kSynth, kCsv };

struct DataConfig {
  DataSource source = DataSource::kSynth;
  SynthConfig synth;
  std::filesystem::path csv_path;
  std::string csv_filter = "GC";
  /// Use at most this many customers from the CSV (0 = all).
  std::size_t max_customers = 0;
  std::size_t window = 48;
  double train_frac = 0.7;
};

enum class SweepAxis { kCompromisedFrac, kEpsilon, kProtocol };

struct SweepConfig {
  SweepAxis axis = SweepAxis::kCompromisedFrac;
  /// Numbers for compromised_frac/epsilon, protocol names for protocol.
  std::vector<Json> values;
  std::vector<Protocol> protocols;
};

struct ExperimentConfig {
  DataConfig data;
  ProtocolConfig protocol;
  /// Per-protocol learning rates that override protocol.lr.
  std::map<Protocol, double> lr_by_protocol;
  std::optional<AttackConfig> attack;
  /// Attack and privacy settings as configured, even when disabled. Sweeps
  /// start from these.
  AttackConfig attack_settings;
  PrivacyBudget dp_settings;
  std::size_t repeats = 5;
  double convergence_tol = 2e-3;
  std::size_t convergence_patience = 5;
  std::filesystem::path output_dir = "out";
  SweepConfig sweep;
  /// Effective configuration document (defaults + file + overrides).
  Json echo;

  /// Protocol settings for one repeat: lr override applied, every seed
  /// shifted by `repeat`.
  ProtocolConfig protocol_for_repeat(std::size_t repeat) const;
};

/// Full default configuration document.
Json default_config_json();

/// Applies a `dotted.key=value` override. The value is parsed as JSON when
/// possible and taken as a string otherwise. Unknown keys are config errors.
void apply_override(Json& doc, const std::string& assignment);

/// Parses a merged document. Throws Error(kConfig) on unknown keys, wrong
/// types or invariant violations.
ExperimentConfig parse_config(const Json& doc);

/// defaults <- file (if any) <- overrides.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::string>& overrides);

/// Customer series for one repeat (synthetic seed shifted by `repeat`).
std::vector<LoadSeries> load_series(const DataConfig& data, std::size_t repeat);

struct RepeatOutcome {
  std::size_t repeat = 0;
  Seeds seeds;
  SimulationResult sim;
  std::optional<std::size_t> convergence;
  std::size_t dimension = 0;
};

/// One repeat end to end: data, partition, simulation.
RepeatOutcome run_repeat(const ExperimentConfig& cfg, std::size_t repeat);

struct ExperimentResult {
  std::vector<RepeatOutcome> repeats;
  Json summary;
};

/// Runs all repeats (up to `jobs` at a time) and builds the summary.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);

Json build_summary(const ExperimentConfig& cfg, const std::vector<RepeatOutcome>& repeats);

/// Writes rounds_<r>.csv, summary.json and timing.json into `dir`.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

/// Writes cell outputs under dir/cells/ and the long-format dir/sweep.csv.
/// Returns the sweep table rows.
struct SweepRow {
  std::string axis_value;
  Protocol protocol;
  std::string metric;
  double mean;
  double stddev;
};
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                std::size_t jobs = 1);

/// Synthetic CSV from cfg.data.synth into `path`.
void generate_data(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// Writes `content` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Sample mean and (n-1) standard deviation; stddev is 0 for one value.
std::pair<double, double> mean_stddev(const std::vector<double>& xs);

}  // namespace loadfl

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
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "loadfl/error.hpp"
#include "loadfl/experiment.hpp"

namespace loadfl {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("loadfl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig quick(std::vector<std::string> extra = {}) {
  std::vector<std::string> sets{"data.synth.n_customers=4", "data.synth.days=4",
                                "data.window=12",          "protocol.n_clients=4",
                                "protocol.rounds=5",       "repeats=2"};
  sets.insert(sets.end(), extra.begin(), extra.end());
  return load_config(std::nullopt, sets);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

TEST(Config, Defaults) {
  const auto cfg = load_config(std::nullopt, {});
  EXPECT_EQ(cfg.repeats, 5u);
  EXPECT_EQ(cfg.protocol.n_clients, 10u);
  EXPECT_EQ(cfg.protocol.rounds, 60u);
  EXPECT_EQ(cfg.data.window, 48u);
  EXPECT_EQ(cfg.protocol.model.input_dim, 48u);
  EXPECT_DOUBLE_EQ(cfg.data.train_frac, 0.7);
  EXPECT_FALSE(cfg.attack.has_value());
  EXPECT_FALSE(cfg.protocol.dp.has_value());
  EXPECT_DOUBLE_EQ(cfg.dp_settings.delta, 1e-5);
  EXPECT_DOUBLE_EQ(cfg.dp_settings.sensitivity, 2.0);
}

TEST(Config, Overrides) {
  const auto cfg = load_config(std::nullopt, {"protocol.protocol=fedavg", "attack.enabled=true",
                                              "attack.threat=tm3", "attack.compromised_frac=0.4",
                                              "protocol.dp.enabled=true", "data.window=24",
                                              "protocol.lr_by_protocol.fedavg=0.2"});
  EXPECT_EQ(cfg.protocol.protocol, Protocol::kFedAvg);
  ASSERT_TRUE(cfg.attack);
  EXPECT_EQ(cfg.attack->threat, ThreatModel::kTm3);
  EXPECT_DOUBLE_EQ(cfg.attack->compromised_frac, 0.4);
  ASSERT_TRUE(cfg.protocol.dp);
  EXPECT_EQ(cfg.protocol.model.input_dim, 24u);
  EXPECT_DOUBLE_EQ(cfg.protocol_for_repeat(0).lr, 0.2);
  const auto r3 = cfg.protocol_for_repeat(3);
  EXPECT_EQ(r3.seeds.data, cfg.protocol.seeds.data + 3);
  EXPECT_EQ(r3.seeds.attack, cfg.protocol.seeds.attack + 3);
}

TEST(Config, FileMerge) {
  const auto dir = scratch("cfgfile");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"protocol": {"rounds": 7, "seeds": {"data": 9}}, "repeats": 2})";
  const auto cfg = load_config(dir / "c.json", {"repeats=3"});
  EXPECT_EQ(cfg.protocol.rounds, 7u);
  EXPECT_EQ(cfg.protocol.seeds.data, 9u);
  EXPECT_EQ(cfg.protocol.seeds.init, 2u);
  EXPECT_EQ(cfg.repeats, 3u);
  std::ofstream(dir / "bad.json") << R"({"protocol": {"roundz": 7}})";
  EXPECT_EQ(kind_of([&] { load_config(dir / "bad.json", {}); }), ErrorKind::kConfig);
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_EQ(kind_of([&] { load_config(dir / "broken.json", {}); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { load_config(dir / "missing.json", {}); }), ErrorKind::kConfig);
  fs::remove_all(dir);
}

TEST(Config, Rejections) {
  for (const char* bad : {"repeats=0", "nope=1", "protocol.rounds=abc", "protocol.protocol=x",
                          "data.synth.days=0", "protocol.dp.enabled=true",
                          "attack.compromised_frac=1.0", "data.train_frac=1.5",
                          "protocol.lr=-1", "protocol.he_bits=500", "sweep.axis=foo",
                          "protocol.lr_by_protocol.fedsgd=0", "data.source=csv", "repeats",
                          "analysis.convergence_patience=0"}) {
    std::vector<std::string> sets{bad};
    if (std::string(bad) == "protocol.dp.enabled=true") sets.push_back("protocol.dp.epsilon=2");
    if (std::string(bad) == "attack.compromised_frac=1.0") sets.push_back("attack.enabled=true");
    EXPECT_EQ(kind_of([&] { load_config(std::nullopt, sets); }), ErrorKind::kConfig) << bad;
  }
}

TEST(Experiment, FileContract) {
  const auto dir = scratch("contract");
  const auto cfg = quick({"protocol.protocol=fedsgd"});
  const auto res = run_experiment(cfg);
  write_experiment(res, dir);
  for (int r = 0; r < 2; ++r) {
    const auto f = dir / ("rounds_" + std::to_string(r) + ".csv");
    ASSERT_TRUE(fs::exists(f));
    EXPECT_EQ(count_lines(f), 6u);
  }
  EXPECT_FALSE(fs::exists(dir / "rounds_2.csv"));
  ASSERT_TRUE(fs::exists(dir / "summary.json"));
  ASSERT_TRUE(fs::exists(dir / "timing.json"));
  const auto s = Json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(s["repeats"], 2);
  EXPECT_EQ(s["per_repeat"].size(), 2u);
  EXPECT_TRUE(s["final"]["rmse"].contains("stddev"));
  EXPECT_TRUE(s["communication"].contains("logical_ratio_vs_raw"));
  EXPECT_EQ(s["config"]["protocol"]["rounds"], 5);
  fs::remove_all(dir);
}

TEST(Experiment, RmseSquaredEqualsMseForOneRepeat) {
  const auto res = run_experiment(quick({"repeats=1", "protocol.protocol=fedsgd"}));
  const auto& f = res.summary["final"];
  EXPECT_NEAR(std::pow(f["rmse"]["mean"].get<double>(), 2), f["mse"]["mean"].get<double>(), 1e-12);
}

TEST(Experiment, JensenGapForSeveralRepeats) {
  // The mean of per-repeat RMSEs never exceeds the square root of the mean MSE.
  const auto res = run_experiment(quick({"repeats=3", "protocol.protocol=fedsgd"}));
  const auto& f = res.summary["final"];
  EXPECT_LE(f["rmse"]["mean"].get<double>(), std::sqrt(f["mse"]["mean"].get<double>()) + 1e-15);
}

TEST(Experiment, DeterministicAcrossRunsAndJobs) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto cfg = quick({"protocol.protocol=signsgd_secure", "repeats=3",
                          "protocol.dp.enabled=true"});
  write_experiment(run_experiment(cfg, 1), a);
  write_experiment(run_experiment(cfg, 3), b);
  for (const char* f : {"rounds_0.csv", "rounds_1.csv", "rounds_2.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, CommunicationRatio) {
  const auto sign = run_experiment(quick({"protocol.protocol=signsgd_plain", "repeats=1"}));
  const auto raw = run_experiment(quick({"protocol.protocol=fedavg", "repeats=1"}));
  const auto& c = sign.summary["communication"];
  const double d = 13;
  EXPECT_DOUBLE_EQ(c["logical_bits_per_client_round"].get<double>(), d + 64);
  EXPECT_DOUBLE_EQ(c["raw_gradient_bits_per_client_round"].get<double>(), 64 * d);
  EXPECT_DOUBLE_EQ(c["logical_ratio_vs_raw"].get<double>(), (d + 64) / (64 * d));
  EXPECT_DOUBLE_EQ(raw.summary["communication"]["logical_ratio_vs_raw"].get<double>(), 1.0);
}

TEST(Sweep, TableShape) {
  const auto dir = scratch("sweep");
  const auto cfg = quick({"repeats=1", R"(sweep.values=[0,0.25])",
                          R"(sweep.protocols=["fedsgd","signsgd_plain"])", "attack.threat=tm2"});
  const auto rows = run_sweep(cfg, dir, 2);
  EXPECT_EQ(rows.size(), 2u * 2 * 3);
  EXPECT_EQ(count_lines(dir / "sweep.csv"), 1u + 12);
  const auto text = slurp(dir / "sweep.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "axis_value,protocol,metric,mean,stddev");
  EXPECT_TRUE(fs::exists(dir / "cells" / "0.25_fedsgd" / "summary.json"));
  const auto s = Json::parse(slurp(dir / "cells" / "0.25_fedsgd" / "summary.json"));
  EXPECT_EQ(s["attack"]["threat"], "tm2");
  fs::remove_all(dir);
}

TEST(Sweep, EpsilonAndProtocolAxes) {
  const auto dir = scratch("sweep_eps");
  auto cfg = quick({"repeats=1", "sweep.axis=epsilon", "sweep.values=[0.3,0.9]",
                    R"(sweep.protocols=["signsgd_plain"])"});
  auto rows = run_sweep(cfg, dir, 1);
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].axis_value, "0.3");
  const auto s = Json::parse(slurp(dir / "cells" / "0.3_signsgd_plain" / "summary.json"));
  EXPECT_GT(s["noise_sigma"].get<double>(), 0.0);
  fs::remove_all(dir);

  cfg = quick({"repeats=1", "sweep.axis=protocol", R"(sweep.values=["fedsgd","fedavg"])"});
  rows = run_sweep(cfg, dir, 1);
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[3].protocol, Protocol::kFedAvg);
  fs::remove_all(dir);

  cfg = quick({"sweep.values=[]"});
  EXPECT_EQ(kind_of([&] { run_sweep(cfg, dir, 1); }), ErrorKind::kConfig);
}

TEST(GenerateData, RowCountAndDeterminism) {
  const auto dir = scratch("gen");
  const auto cfg = load_config(std::nullopt, {"data.synth.n_customers=5", "data.synth.days=7"});
  generate_data(cfg, dir / "a.csv");
  generate_data(cfg, dir / "b.csv");
  EXPECT_EQ(count_lines(dir / "a.csv"), 5u * 7 * 48 + 1);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  fs::remove_all(dir);
}

TEST(CsvSource, RunsFromFile) {
  const auto dir = scratch("csvsrc");
  auto cfg = quick({"data.synth.n_customers=6"});
  generate_data(cfg, dir / "load.csv");
  cfg = quick({"data.source=csv", "data.csv.path=" + (dir / "load.csv").string(),
               "data.csv.max_customers=4", "repeats=1", "protocol.protocol=fedsgd"});
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.repeats.size(), 1u);
  EXPECT_EQ(load_series(cfg.data, 0).size(), 4u);
  fs::remove_all(dir);
}

TEST(MeanStddev, Sample) {
  const auto [m, s] = mean_stddev({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_DOUBLE_EQ(s, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(mean_stddev({7.0}).second, 0.0);
}

}  // namespace
}  // namespace loadfl

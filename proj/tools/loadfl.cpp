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

// Command-line front end: gen-data, run, sweep, validate-config.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "loadfl/error.hpp"
#include "loadfl/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

int exit_code(loadfl::ErrorClass c) {
  switch (c) {
    case loadfl::ErrorClass::kConfig: return kExitConfig;
    case loadfl::ErrorClass::kData: return kExitData;
    default: return kExitRuntime;
  }
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::size_t jobs = 1;
};

loadfl::ExperimentConfig resolve(const Common& c) {
  std::optional<std::filesystem::path> file;
  if (!c.config.empty()) file = c.config;
  return loadfl::load_config(file, c.sets);
}

std::filesystem::path out_dir(const Common& c, const loadfl::ExperimentConfig& cfg) {
  return c.out.empty() ? cfg.output_dir : std::filesystem::path(c.out);
}

void add_common(CLI::App* app, Common& c, bool with_jobs) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--set", c.sets, "Override a config key (dotted.key=value)")->take_all();
  app->add_option("--out", c.out, "Output directory");
  if (with_jobs) app->add_option("--jobs", c.jobs, "Parallel workers")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated load forecasting simulator"};
  app.require_subcommand(1);

  Common gen, run, sweep, validate;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic load CSV");
  add_common(gen_cmd, gen, false);
  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  add_common(run_cmd, run, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common(sweep_cmd, sweep, true);
  auto* validate_cmd = app.add_subcommand("validate-config", "Check a configuration and print it");
  add_common(validate_cmd, validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen_cmd) {
      const auto cfg = resolve(gen);
      const auto path = out_dir(gen, cfg) / "load.csv";
      loadfl::generate_data(cfg, path);
      std::cout << path.string() << "\n";
    } else if (*run_cmd) {
      const auto cfg = resolve(run);
      const auto dir = out_dir(run, cfg);
      const auto result = loadfl::run_experiment(cfg, run.jobs);
      loadfl::write_experiment(result, dir);
      const auto& f = result.summary["final"];
      std::cout << "protocol=" << result.summary["protocol"].get<std::string>()
                << " mse=" << f["mse"]["mean"].get<double>()
                << " rmse=" << f["rmse"]["mean"].get<double>()
                << " mape=" << f["mape"]["mean"].get<double>() << "\n"
                << "wrote " << dir.string() << "\n";
    } else if (*sweep_cmd) {
      const auto cfg = resolve(sweep);
      const auto dir = out_dir(sweep, cfg);
      const auto rows = loadfl::run_sweep(cfg, dir, sweep.jobs);
      std::cout << "axis_value,protocol,metric,mean,stddev\n";
      for (const auto& r : rows) {
        std::cout << r.axis_value << ',' << loadfl::to_string(r.protocol) << ',' << r.metric << ','
                  << loadfl::format_double(r.mean) << ',' << loadfl::format_double(r.stddev) << "\n";
      }
    } else if (*validate_cmd) {
      const auto cfg = resolve(validate);
      std::cout << cfg.echo.dump(2) << "\n";
    }
  } catch (const loadfl::Error& e) {
    std::cerr << "error [" << loadfl::to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(loadfl::error_class(e.kind()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

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

#include "loadfl/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "loadfl/error.hpp"

namespace loadfl {
namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

bool is_open_object(const std::string& path) { return path == "protocol.lr_by_protocol"; }

// Recursively overlays `patch` onto `base`, rejecting keys `base` lacks.
void merge_into(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) config_error("'" + path + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) {
      if (is_open_object(path)) {
        base[it.key()] = it.value();
        continue;
      }
      config_error("unknown key '" + key_path + "'");
    }
    Json& slot = base[it.key()];
    if (slot.is_object() && !is_open_object(key_path)) {
      merge_into(slot, it.value(), key_path);
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T get(const Json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error("'" + path + "." + key + "' has the wrong type");
  }
}

std::size_t get_count(const Json& j, const char* key, const std::string& path) {
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    config_error("'" + path + "." + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const Json& j, const char* key, const std::string& path) {
  const Json& v = j.at(key);
  if (!v.is_number_integer()) config_error("'" + path + "." + key + "' must be an integer");
  return v.is_number_unsigned() ? v.get<std::uint64_t>()
                                : static_cast<std::uint64_t>(v.get<std::int64_t>());
}

std::string cell_value_label(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_double(v.get<double>());
  return v.dump();
}

/// Runs task(i) for i in [0, n) on up to `jobs` threads; rethrows the
/// lowest-index failure.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Json default_config_json() {
  Json j;
  j["data"] = {{"source", "synth"},
               {"window", 48},
               {"train_frac", 0.7},
               {"synth",
                {{"n_customers", 20},
                 {"days", 28},
                 {"base_kw", 1.0},
                 {"daily_amp", 0.5},
                 {"weekly_amp", 0.2},
                 {"noise_std", 0.1},
                 {"seed", 1}}},
               {"csv", {{"path", ""}, {"filter", "GC"}, {"max_customers", 0}}}};
  j["protocol"] = {{"protocol", "signsgd_secure"},
                   {"n_clients", 10},
                   {"rounds", 60},
                   {"lr", 0.01},
                   {"lr_by_protocol", {{"signsgd_secure", 0.003}, {"signsgd_plain", 0.003}}},
                   {"local_epochs", 1},
                   {"minibatch", 0},
                   {"model", {{"kind", "linear_ar"}, {"hidden_dim", 16}}},
                   {"dp", {{"enabled", false}, {"epsilon", 0.5}, {"delta", 1e-5}, {"sensitivity", 2.0}}},
                   {"he_bits", 512},
                   {"fixed_point_scale", 65536},
                   {"seeds", {{"data", 1}, {"init", 2}, {"noise", 3}, {"attack", 4}}}};
  j["attack"] = {{"enabled", false},
                 {"threat", "tm1"},
                 {"compromised_frac", 0.0},
                 {"trigger_v", 3.0},
                 {"poison_frac", 0.5},
                 {"tm2_mode", "sign_flip"},
                 {"gamma", 1.0},
                 {"collusion", "identical_signflip"}};
  j["analysis"] = {{"convergence_tol", 2e-3}, {"convergence_patience", 5}};
  j["repeats"] = 5;
  j["output_dir"] = "out";
  j["sweep"] = {{"axis", "compromised_frac"},
                {"values", {0.1, 0.2, 0.3}},
                {"protocols", {"fedsgd", "signsgd_secure"}}};
  return j;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    config_error("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }

  Json* node = &doc;
  std::string path;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) config_error("override key '" + key + "' is malformed");
    const bool last = dot == std::string::npos;
    if (!node->is_object()) config_error("'" + path + "' is not a section");
    if (!node->contains(part) && !(last && is_open_object(path))) {
      config_error("unknown key '" + key + "'");
    }
    path = path.empty() ? part : path + "." + part;
    node = &(*node)[part];
    if (last) break;
    start = dot + 1;
  }
  if (node->is_object() && !value.is_object()) config_error("'" + key + "' is a section");
  *node = value;
}

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig cfg;
  cfg.echo = doc;
  try {
    // data
    const Json& d = doc.at("data");
    const auto source = get<std::string>(d, "source", "data");
    if (source == "synth") {
      cfg.data.source = DataSource::kSynth;
    } else if (source == "csv") {
      cfg.data.source = DataSource::kCsv;
    } else {
      config_error("data.source must be 'synth' or 'csv'");
    }
    cfg.data.window = get_count(d, "window", "data");
    if (cfg.data.window == 0) config_error("data.window must be positive");
    cfg.data.train_frac = get<double>(d, "train_frac", "data");
    if (!(cfg.data.train_frac > 0.0 && cfg.data.train_frac < 1.0)) {
      config_error("data.train_frac must lie in (0, 1)");
    }
    const Json& s = d.at("synth");
    cfg.data.synth.n_customers = get_count(s, "n_customers", "data.synth");
    cfg.data.synth.days = get_count(s, "days", "data.synth");
    cfg.data.synth.base_kw = get<double>(s, "base_kw", "data.synth");
    cfg.data.synth.daily_amp = get<double>(s, "daily_amp", "data.synth");
    cfg.data.synth.weekly_amp = get<double>(s, "weekly_amp", "data.synth");
    cfg.data.synth.noise_std = get<double>(s, "noise_std", "data.synth");
    cfg.data.synth.seed = get_seed(s, "seed", "data.synth");
    cfg.data.synth.validate();
    const Json& c = d.at("csv");
    cfg.data.csv_path = get<std::string>(c, "path", "data.csv");
    cfg.data.csv_filter = get<std::string>(c, "filter", "data.csv");
    cfg.data.max_customers = get_count(c, "max_customers", "data.csv");
    if (cfg.data.source == DataSource::kCsv && cfg.data.csv_path.empty()) {
      config_error("data.csv.path is required when data.source is 'csv'");
    }

    // protocol
    const Json& p = doc.at("protocol");
    auto& pc = cfg.protocol;
    pc.protocol = parse_protocol(get<std::string>(p, "protocol", "protocol"));
    pc.n_clients = get_count(p, "n_clients", "protocol");
    pc.rounds = get_count(p, "rounds", "protocol");
    pc.lr = get<double>(p, "lr", "protocol");
    for (const auto& [name, lr] : p.at("lr_by_protocol").items()) {
      if (!lr.is_number()) config_error("protocol.lr_by_protocol." + name + " must be a number");
      const double v = lr.get<double>();
      if (!(v > 0.0)) config_error("protocol.lr_by_protocol." + name + " must be > 0");
      cfg.lr_by_protocol[parse_protocol(name)] = v;
    }
    pc.local_epochs = get_count(p, "local_epochs", "protocol");
    pc.minibatch = get_count(p, "minibatch", "protocol");
    const Json& m = p.at("model");
    pc.model.kind = parse_model_kind(get<std::string>(m, "kind", "protocol.model"));
    pc.model.hidden_dim = get_count(m, "hidden_dim", "protocol.model");
    pc.model.input_dim = cfg.data.window;
    const Json& dp = p.at("dp");
    PrivacyBudget& b = cfg.dp_settings;
    b.epsilon = get<double>(dp, "epsilon", "protocol.dp");
    b.delta = get<double>(dp, "delta", "protocol.dp");
    b.sensitivity = get<double>(dp, "sensitivity", "protocol.dp");
    if (get<bool>(dp, "enabled", "protocol.dp")) {
      b.validate();
      pc.dp = b;
    }
    pc.he_bits = static_cast<unsigned>(get_count(p, "he_bits", "protocol"));
    pc.fixed_point_scale = get_count(p, "fixed_point_scale", "protocol");
    const Json& sd = p.at("seeds");
    pc.seeds.data = get_seed(sd, "data", "protocol.seeds");
    pc.seeds.init = get_seed(sd, "init", "protocol.seeds");
    pc.seeds.noise = get_seed(sd, "noise", "protocol.seeds");
    pc.seeds.attack = get_seed(sd, "attack", "protocol.seeds");
    pc.validate();

    // attack
    const Json& a = doc.at("attack");
    {
      AttackConfig& ac = cfg.attack_settings;
      ac.threat = parse_threat(get<std::string>(a, "threat", "attack"));
      ac.compromised_frac = get<double>(a, "compromised_frac", "attack");
      ac.trigger_v = get<double>(a, "trigger_v", "attack");
      ac.poison_frac = get<double>(a, "poison_frac", "attack");
      ac.tm2_mode = parse_tm2_mode(get<std::string>(a, "tm2_mode", "attack"));
      ac.gamma = get<double>(a, "gamma", "attack");
      ac.collusion = parse_collusion(get<std::string>(a, "collusion", "attack"));
      ac.seed = pc.seeds.attack;
      if (get<bool>(a, "enabled", "attack")) {
        ac.validate();
        ac.compromised_count(pc.n_clients);
        cfg.attack = ac;
      }
    }

    const Json& an = doc.at("analysis");
    cfg.convergence_tol = get<double>(an, "convergence_tol", "analysis");
    cfg.convergence_patience = get_count(an, "convergence_patience", "analysis");
    if (!(cfg.convergence_tol >= 0.0)) config_error("analysis.convergence_tol must be >= 0");
    if (cfg.convergence_patience < 1) config_error("analysis.convergence_patience must be >= 1");

    cfg.repeats = get_count(doc, "repeats", "");
    if (cfg.repeats < 1) config_error("repeats must be >= 1");
    cfg.output_dir = get<std::string>(doc, "output_dir", "");

    const Json& sw = doc.at("sweep");
    const auto axis = get<std::string>(sw, "axis", "sweep");
    if (axis == "compromised_frac") {
      cfg.sweep.axis = SweepAxis::kCompromisedFrac;
    } else if (axis == "epsilon") {
      cfg.sweep.axis = SweepAxis::kEpsilon;
    } else if (axis == "protocol") {
      cfg.sweep.axis = SweepAxis::kProtocol;
    } else {
      config_error("sweep.axis must be compromised_frac, epsilon or protocol");
    }
    if (!sw.at("values").is_array()) config_error("sweep.values must be an array");
    for (const auto& v : sw.at("values")) {
      if (cfg.sweep.axis == SweepAxis::kProtocol) {
        if (!v.is_string()) config_error("sweep.values must be protocol names");
        parse_protocol(v.get<std::string>());
      } else if (!v.is_number()) {
        config_error("sweep.values must be numbers");
      }
      cfg.sweep.values.push_back(v);
    }
    if (!sw.at("protocols").is_array()) config_error("sweep.protocols must be an array");
    for (const auto& v : sw.at("protocols")) {
      if (!v.is_string()) config_error("sweep.protocols must be protocol names");
      cfg.sweep.protocols.push_back(parse_protocol(v.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    config_error(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::string>& overrides) {
  Json doc = default_config_json();
  if (file) {
    std::ifstream in(*file);
    if (!in) config_error("cannot open config " + file->string());
    Json user;
    try {
      user = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      config_error("config " + file->string() + " is not valid JSON: " + e.what());
    }
    merge_into(doc, user, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

ProtocolConfig ExperimentConfig::protocol_for_repeat(std::size_t repeat) const {
  ProtocolConfig pc = protocol;
  if (auto it = lr_by_protocol.find(pc.protocol); it != lr_by_protocol.end()) pc.lr = it->second;
  pc.seeds.data += repeat;
  pc.seeds.init += repeat;
  pc.seeds.noise += repeat;
  pc.seeds.attack += repeat;
  return pc;
}

std::vector<LoadSeries> load_series(const DataConfig& data, std::size_t repeat) {
  if (data.source == DataSource::kSynth) {
    SynthConfig sc = data.synth;
    sc.seed += repeat;
    return synth_generate(sc);
  }
  auto series = load_csv(data.csv_path, data.csv_filter);
  if (data.max_customers > 0 && series.size() > data.max_customers) {
    series.resize(data.max_customers);
  }
  return series;
}

RepeatOutcome run_repeat(const ExperimentConfig& cfg, std::size_t repeat) {
  RepeatOutcome out;
  out.repeat = repeat;
  const ProtocolConfig pc = cfg.protocol_for_repeat(repeat);
  out.seeds = pc.seeds;
  std::optional<AttackConfig> attack = cfg.attack;
  if (attack) attack->seed = pc.seeds.attack;

  const auto series = load_series(cfg.data, repeat);
  const auto fd = prepare_federated_data(series, cfg.data.window, cfg.data.train_frac,
                                         pc.n_clients, pc.seeds.data);
  out.sim = run_simulation(fd.shards, pc, attack);
  out.dimension = out.sim.final_params.size();
  std::vector<double> losses;
  for (const auto& r : out.sim.records) losses.push_back(r.global_train_loss);
  out.convergence = convergence_round(losses, cfg.convergence_tol, cfg.convergence_patience);
  return out;
}

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

Json build_summary(const ExperimentConfig& cfg, const std::vector<RepeatOutcome>& repeats) {
  Json s;
  const ProtocolConfig pc = cfg.protocol_for_repeat(0);
  s["protocol"] = std::string(to_string(pc.protocol));
  s["repeats"] = repeats.size();
  s["rounds"] = pc.rounds;
  s["n_clients"] = pc.n_clients;
  s["dimension"] = repeats.empty() ? 0 : repeats.front().dimension;
  s["attack"] = cfg.attack ? Json{{"threat", to_string(cfg.attack->threat)},
                                  {"compromised_frac", cfg.attack->compromised_frac}}
                           : Json(nullptr);
  s["noise_sigma"] = pc.noise_sigma();

  std::vector<double> mse, rmse, mape, train_loss, conv;
  Json per = Json::array();
  double bytes_total = 0.0, bits_total = 0.0;
  for (const auto& r : repeats) {
    Json e;
    e["repeat"] = r.repeat;
    e["seeds"] = {{"data", r.seeds.data},
                  {"init", r.seeds.init},
                  {"noise", r.seeds.noise},
                  {"attack", r.seeds.attack}};
    std::size_t bytes = 0, bits = 0;
    for (const auto& rec : r.sim.records) {
      bytes += rec.bytes_up;
      bits += rec.logical_bits_up;
    }
    if (!r.sim.records.empty()) {
      const auto& last = r.sim.records.back();
      mse.push_back(last.test_mse);
      rmse.push_back(last.test_rmse);
      mape.push_back(last.test_mape);
      train_loss.push_back(last.global_train_loss);
      e["final_mse"] = last.test_mse;
      e["final_rmse"] = last.test_rmse;
      e["final_mape"] = last.test_mape;
      e["final_train_loss"] = last.global_train_loss;
    }
    e["convergence_round"] = r.convergence ? Json(*r.convergence) : Json(nullptr);
    if (r.convergence) conv.push_back(static_cast<double>(*r.convergence));
    e["bytes_up_total"] = bytes;
    e["logical_bits_up_total"] = bits;
    bytes_total += static_cast<double>(bytes);
    bits_total += static_cast<double>(bits);
    per.push_back(std::move(e));
  }
  const auto stat = [](const std::vector<double>& xs) {
    const auto [m, sd] = mean_stddev(xs);
    return Json{{"mean", m}, {"stddev", sd}};
  };
  s["final"] = {{"mse", stat(mse)}, {"rmse", stat(rmse)}, {"mape", stat(mape)},
                {"train_loss", stat(train_loss)}};
  const auto [conv_mean, conv_sd] = mean_stddev(conv);
  s["convergence_round"] = {{"mean", conv.empty() ? Json(nullptr) : Json(conv_mean)},
                            {"stddev", conv.empty() ? Json(nullptr) : Json(conv_sd)},
                            {"converged_repeats", conv.size()},
                            {"tol", cfg.convergence_tol},
                            {"patience", cfg.convergence_patience}};

  const std::size_t d = repeats.empty() ? 0 : repeats.front().dimension;
  const double client_rounds =
      repeats.empty() ? 0.0
                      : static_cast<double>(repeats.size() * pc.rounds * pc.n_clients);
  const double logical_per = client_rounds > 0 ? bits_total / client_rounds : 0.0;
  const double raw_bits = 64.0 * static_cast<double>(d);
  s["communication"] = {{"logical_bits_per_client_round", logical_per},
                        {"raw_gradient_bits_per_client_round", raw_bits},
                        {"logical_ratio_vs_raw", raw_bits > 0 ? logical_per / raw_bits : 0.0},
                        {"wire_bytes_per_client_round",
                         client_rounds > 0 ? bytes_total / client_rounds : 0.0}};
  s["per_repeat"] = std::move(per);
  s["config"] = cfg.echo;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
  ExperimentResult out;
  out.repeats.resize(cfg.repeats);
  parallel_for(cfg.repeats, jobs, [&](std::size_t r) { out.repeats[r] = run_repeat(cfg, r); });
  out.summary = build_summary(cfg, out.repeats);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot rename into " + path.string() + ": " + ec.message());
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
  Json timing;
  timing["repeats"] = Json::array();
  for (const auto& r : result.repeats) {
    std::ostringstream csv;
    write_rounds_csv(csv, r.sim.records);
    write_file_atomic(dir / ("rounds_" + std::to_string(r.repeat) + ".csv"), csv.str());
    Json t;
    std::int64_t total = 0;
    Json per_round = Json::array();
    for (const auto& rec : r.sim.records) {
      total += rec.wall_time_ms;
      per_round.push_back(rec.wall_time_ms);
    }
    t["repeat"] = r.repeat;
    t["total_ms"] = total;
    t["round_ms"] = std::move(per_round);
    timing["repeats"].push_back(std::move(t));
  }
  write_file_atomic(dir / "summary.json", result.summary.dump(2) + "\n");
  write_file_atomic(dir / "timing.json", timing.dump(2) + "\n");
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                std::size_t jobs) {
  if (cfg.sweep.values.empty()) throw Error(ErrorKind::kConfig, "sweep.values is empty");
  const bool protocol_axis = cfg.sweep.axis == SweepAxis::kProtocol;
  if (!protocol_axis && cfg.sweep.protocols.empty()) {
    throw Error(ErrorKind::kConfig, "sweep.protocols is empty");
  }

  struct Cell {
    std::string label;
    ExperimentConfig cfg;
  };
  std::vector<Cell> cells;
  for (const auto& value : cfg.sweep.values) {
    const std::vector<Protocol> protocols =
        protocol_axis ? std::vector<Protocol>{parse_protocol(value.get<std::string>())}
                      : cfg.sweep.protocols;
    for (Protocol proto : protocols) {
      Cell c{cell_value_label(value), cfg};
      c.cfg.protocol.protocol = proto;
      Json& echo = c.cfg.echo;
      echo["protocol"]["protocol"] = std::string(to_string(proto));
      if (cfg.sweep.axis == SweepAxis::kCompromisedFrac) {
        AttackConfig a = cfg.attack_settings;
        a.compromised_frac = value.get<double>();
        a.seed = cfg.protocol.seeds.attack;
        a.validate();
        a.compromised_count(cfg.protocol.n_clients);
        c.cfg.attack = a;
        echo["attack"]["enabled"] = true;
        echo["attack"]["compromised_frac"] = a.compromised_frac;
      } else if (cfg.sweep.axis == SweepAxis::kEpsilon) {
        PrivacyBudget b = cfg.dp_settings;
        b.epsilon = value.get<double>();
        b.validate();
        c.cfg.protocol.dp = b;
        echo["protocol"]["dp"]["enabled"] = true;
        echo["protocol"]["dp"]["epsilon"] = b.epsilon;
      }
      cells.push_back(std::move(c));
    }
  }

  // Every (cell, repeat) pair is an independent task.
  std::vector<std::vector<RepeatOutcome>> outcomes(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) outcomes[i].resize(cfg.repeats);
  parallel_for(cells.size() * cfg.repeats, jobs, [&](std::size_t task) {
    const std::size_t i = task / cfg.repeats;
    const std::size_t r = task % cfg.repeats;
    outcomes[i][r] = run_repeat(cells[i].cfg, r);
  });

  std::vector<SweepRow> rows;
  std::ostringstream table;
  table << "axis_value,protocol,metric,mean,stddev\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ExperimentResult res;
    res.repeats = std::move(outcomes[i]);
    res.summary = build_summary(cells[i].cfg, res.repeats);
    const std::string name = cells[i].label + "_" + std::string(to_string(cells[i].cfg.protocol.protocol));
    write_experiment(res, dir / "cells" / name);
    for (const char* metric : {"mse", "rmse", "mape"}) {
      const auto& st = res.summary["final"][metric];
      SweepRow row{cells[i].label, cells[i].cfg.protocol.protocol, metric,
                   st["mean"].get<double>(), st["stddev"].get<double>()};
      table << row.axis_value << ',' << to_string(row.protocol) << ',' << row.metric << ','
            << format_double(row.mean) << ',' << format_double(row.stddev) << '\n';
      rows.push_back(std::move(row));
    }
  }
  write_file_atomic(dir / "sweep.csv", table.str());
  return rows;
}

void generate_data(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  const auto series = synth_generate(cfg.data.synth);
  std::ostringstream out;
  write_load_csv(out, series, "GC");
  write_file_atomic(path, out.str());
}

}  // namespace loadfl

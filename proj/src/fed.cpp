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

#include "loadfl/fed.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "loadfl/analysis.hpp"
#include "loadfl/error.hpp"

namespace loadfl {
namespace {

// Substream tags.
constexpr std::uint64_t kTagBatch = 0x6261746368;
constexpr std::uint64_t kTagNoise = 0x6e6f697365;
constexpr std::uint64_t kTagEncrypt = 0x656e63;
constexpr std::uint64_t kTagKeygen = 0x6b6579;
constexpr std::uint64_t kTagPoison = 0x706f69736f6e;
constexpr std::uint64_t kTagModel = 0x6d6f64656c;
constexpr std::uint64_t kTagCollude = 0x636f6c6c;

Batch as_batch(const SupervisedSet& s) { return {s.window, s.inputs, s.targets}; }

SupervisedSet gather(const SupervisedSet& s, std::span<const std::size_t> idx) {
  SupervisedSet out;
  out.window = s.window;
  out.scaler = s.scaler;
  out.inputs.reserve(idx.size() * s.window);
  out.targets.reserve(idx.size());
  for (auto i : idx) out.push_back(s.row(i), s.targets[i]);
  return out;
}

void require_raw(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw Error(ErrorKind::kEmptyUpdateSet, "no updates to aggregate");
  const std::size_t d = updates.front().is_raw() ? updates.front().raw().size() : 0;
  for (const auto& u : updates) {
    if (!u.is_raw()) {
      throw Error(ErrorKind::kInvalidArgument, "expected raw vector payloads");
    }
    if (u.raw().size() != d) {
      throw Error(ErrorKind::kDimensionMismatch, "client " + std::to_string(u.client_id) +
                                                     " sent " + std::to_string(u.raw().size()) +
                                                     " coordinates, expected " +
                                                     std::to_string(d));
    }
  }
}

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kFedSgd: return "fedsgd";
    case Protocol::kFedAvg: return "fedavg";
    case Protocol::kSignSgdSecure: return "signsgd_secure";
    case Protocol::kSignSgdPlain: return "signsgd_plain";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "fedsgd") return Protocol::kFedSgd;
  if (s == "fedavg") return Protocol::kFedAvg;
  if (s == "signsgd_secure") return Protocol::kSignSgdSecure;
  if (s == "signsgd_plain") return Protocol::kSignSgdPlain;
  throw Error(ErrorKind::kConfig, "unknown protocol '" + std::string(s) + "'");
}

bool is_sign_protocol(Protocol p) {
  return p == Protocol::kSignSgdSecure || p == Protocol::kSignSgdPlain;
}

void ProtocolConfig::validate() const {
  model.validate();
  if (n_clients < 1) throw Error(ErrorKind::kConfig, "protocol.n_clients must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error(ErrorKind::kConfig, "protocol.lr must be > 0");
  if (local_epochs < 1) throw Error(ErrorKind::kConfig, "protocol.local_epochs must be >= 1");
  if (he_bits < 512 || he_bits % 2 != 0) {
    throw Error(ErrorKind::kConfig, "protocol.he_bits must be even and >= 512");
  }
  if (fixed_point_scale < 2) throw Error(ErrorKind::kConfig, "protocol.fixed_point_scale too small");
  if (dp) dp->validate();
}

double ProtocolConfig::noise_sigma() const { return dp ? gaussian_sigma(*dp) : 0.0; }

KeyAuthority::KeyAuthority(PaillierKeypair keypair, std::size_t min_contributors)
    : keypair_(std::move(keypair)), min_contributors_(min_contributors) {}

std::vector<mpz_class> KeyAuthority::decrypt_aggregate(std::span<const Ciphertext> sums,
                                                       std::size_t contributors) const {
  if (contributors < min_contributors_) {
    throw Error(ErrorKind::kInvalidArgument,
                "refusing to decrypt a sum of " + std::to_string(contributors) +
                    " ciphertexts (minimum " + std::to_string(min_contributors_) + ")");
  }
  std::vector<mpz_class> out;
  out.reserve(sums.size());
  for (const auto& c : sums) out.push_back(decrypt(keypair_.sec, c));
  return out;
}

double sign_payload_bound(double sigma) { return 1.0 + 50.0 * sigma; }

ParamVector local_vector(const ClientShard& shard, const ParamVector& global,
                         const ProtocolConfig& cfg, Rng& rng) {
  if (shard.train.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "client " + std::to_string(shard.client_id) + " has no training data");
  }
  const std::size_t n = shard.train.size();
  const bool full = cfg.minibatch == 0 || cfg.minibatch >= n;

  if (cfg.protocol == Protocol::kFedSgd) {
    if (full) return loss_and_grad(global, cfg.model, as_batch(shard.train)).grad;
    auto perm = random_permutation(n, rng);
    perm.resize(cfg.minibatch);
    const auto mb = gather(shard.train, perm);
    return loss_and_grad(global, cfg.model, as_batch(mb)).grad;
  }

  ParamVector local = global;
  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    if (full) {
      local = apply_update(local, loss_and_grad(local, cfg.model, as_batch(shard.train)).grad,
                           cfg.lr);
      continue;
    }
    const auto perm = random_permutation(n, rng);
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      const std::size_t end = std::min(n, start + cfg.minibatch);
      const auto mb = gather(shard.train, std::span(perm).subspan(start, end - start));
      local = apply_update(local, loss_and_grad(local, cfg.model, as_batch(mb)).grad, cfg.lr);
    }
  }
  // Delta oriented like a gradient: global - local.
  return apply_update(global, local, 1.0);
}

ParamVector sign_vector(const ParamVector& v) {
  ParamVector out = v;
  for (double& x : out.values()) x = sign_of(x);
  return out;
}

ClientUpdate package_update(std::size_t client_id, const ParamVector& v,
                            const ProtocolConfig& cfg, const PublicKey* pk, Rng& noise_rng,
                            Rng& enc_rng) {
  const double sigma = cfg.noise_sigma();
  const std::size_t d = v.size();
  ClientUpdate u;
  u.client_id = client_id;

  if (!is_sign_protocol(cfg.protocol)) {
    u.payload = sigma > 0.0 ? perturb(v, sigma, noise_rng) : v;
    u.bytes_on_wire = 8 * d;
    u.logical_bits = 64 * d;
    return u;
  }

  const ParamVector noisy = perturb(sign_vector(v), sigma, noise_rng);
  u.logical_bits = d + 64;
  if (cfg.protocol == Protocol::kSignSgdPlain) {
    u.payload = noisy;
    u.bytes_on_wire = sigma > 0.0 ? 8 * d : (d + 7) / 8;
    return u;
  }

  if (pk == nullptr) throw Error(ErrorKind::kInvalidArgument, "signsgd_secure needs a public key");
  const FixedPointCodec codec(*pk, cfg.fixed_point_scale);
  const double bound = sign_payload_bound(sigma);
  std::vector<Ciphertext> cts;
  cts.reserve(d);
  for (double x : noisy.values()) {
    if (std::fabs(x) > bound) {
      throw Error(ErrorKind::kMagnitudeOverflow, "perturbed sign exceeds the encoding bound");
    }
    cts.push_back(encrypt(*pk, encode_fixed(x, codec), enc_rng));
  }
  u.payload = std::move(cts);
  u.bytes_on_wire = d * pk->ciphertext_bytes();
  return u;
}

ClientUpdate local_round(const ClientShard& shard, const ParamVector& global,
                         const ProtocolConfig& cfg, const std::optional<AttackConfig>& attack,
                         const PublicKey* pk, Rng& rng) {
  Rng batch_rng = rng.substream(kTagBatch);
  Rng noise_rng = rng.substream(kTagNoise);
  Rng enc_rng = rng.substream(kTagEncrypt);
  ParamVector v = local_vector(shard, global, cfg, batch_rng);
  if (shard.role == Role::kModelAttacker) {
    if (!attack) throw Error(ErrorKind::kRoleMismatch, "model attacker without attack config");
    Rng attack_rng = rng.substream(kTagModel);
    v = poison_update(v, *attack, attack_rng);
  }
  return package_update(shard.client_id, v, cfg, pk, noise_rng, enc_rng);
}

ParamVector aggregate_fedsgd(std::span<const ClientUpdate> updates) {
  require_raw(updates);
  ParamVector out = updates.front().raw().filled(0.0);
  auto acc = out.values();
  for (const auto& u : updates) {
    const auto v = u.raw().values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(updates.size());
  for (double& x : acc) x *= inv;
  return out;
}

ParamVector aggregate_fedavg(std::span<const ClientUpdate> updates,
                             std::span<const double> weights) {
  require_raw(updates);
  if (weights.size() != updates.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "one weight per update required");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::kInvalidWeights, "client weights must be positive");
    }
    total += w;
  }
  ParamVector out = updates.front().raw().filled(0.0);
  auto acc = out.values();
  for (std::size_t k = 0; k < updates.size(); ++k) {
    const auto v = updates[k].raw().values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weights[k] * v[i];
  }
  for (double& x : acc) x /= total;
  return out;
}

ParamVector aggregate_signsgd(std::span<const ClientUpdate> updates,
                              const KeyAuthority& authority, const FixedPointCodec& codec,
                              const std::vector<Segment>& layout) {
  if (updates.empty()) throw Error(ErrorKind::kEmptyUpdateSet, "no updates to aggregate");
  const PublicKey& pk = authority.public_key();
  const std::size_t d = updates.front().is_raw() ? 0 : updates.front().encrypted().size();
  for (const auto& u : updates) {
    if (u.is_raw()) throw Error(ErrorKind::kInvalidArgument, "expected encrypted payloads");
    if (u.encrypted().size() != d) {
      throw Error(ErrorKind::kDimensionMismatch, "client " + std::to_string(u.client_id) +
                                                     " sent a different number of ciphertexts");
    }
  }

  std::vector<Ciphertext> sums = updates.front().encrypted();
  for (std::size_t k = 1; k < updates.size(); ++k) {
    const auto& cts = updates[k].encrypted();
    for (std::size_t i = 0; i < d; ++i) sums[i] = add_cipher(pk, sums[i], cts[i]);
  }
  const auto plain = authority.decrypt_aggregate(sums, updates.size());

  std::vector<double> signs(d);
  for (std::size_t i = 0; i < d; ++i) signs[i] = sign_of(decode_fixed(plain[i], codec));
  if (layout.empty()) return ParamVector::flat(std::move(signs));
  return ParamVector(layout, std::move(signs));
}

ParamVector aggregate_sign_plain(std::span<const ClientUpdate> updates) {
  require_raw(updates);
  ParamVector out = updates.front().raw().filled(0.0);
  auto acc = out.values();
  for (const auto& u : updates) {
    const auto v = u.raw().values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  for (double& x : acc) x = sign_of(x);
  return out;
}

SimulationResult run_simulation(std::span<const ClientShard> shards, const ProtocolConfig& cfg,
                                const std::optional<AttackConfig>& attack) {
  cfg.validate();
  if (shards.size() != cfg.n_clients) {
    throw Error(ErrorKind::kInvalidArgument, std::to_string(shards.size()) + " shards for " +
                                                 std::to_string(cfg.n_clients) + " clients");
  }
  const auto roles = assign_roles(cfg.n_clients, attack);
  const bool attack_active =
      std::any_of(roles.begin(), roles.end(), [](Role r) { return r != Role::kHonest; });

  std::vector<ClientShard> local(shards.begin(), shards.end());
  for (std::size_t k = 0; k < local.size(); ++k) {
    local[k].role = roles[k];
    if (roles[k] == Role::kPoisoned || roles[k] == Role::kColluder) {
      Rng rng = Rng(attack->seed).substream({kTagPoison, k});
      local[k] = poison_data(local[k], *attack, rng);
    }
  }

  // Evaluation uses the clean data.
  std::vector<SupervisedSet> trains, tests;
  for (const auto& s : shards) {
    trains.push_back(s.train);
    if (!s.test.empty()) tests.push_back(s.test);
  }
  const SupervisedSet pooled_train = concat(trains);
  const SupervisedSet pooled_test = concat(tests);

  SimulationResult result;
  result.initial_params = init_params(cfg.model, cfg.seeds.init);
  ParamVector params = result.initial_params;

  std::optional<KeyAuthority> authority;
  std::optional<FixedPointCodec> codec;
  if (cfg.protocol == Protocol::kSignSgdSecure) {
    Rng key_rng = Rng(cfg.seeds.noise).substream(kTagKeygen);
    authority.emplace(keygen(cfg.he_bits, key_rng), cfg.n_clients);
    codec.emplace(authority->public_key(), cfg.fixed_point_scale);
    codec->check_headroom(sign_payload_bound(cfg.noise_sigma()), cfg.n_clients);
  }
  const PublicKey* pk = authority ? &authority->public_key() : nullptr;

  std::vector<double> weights;
  for (const auto& s : local) weights.push_back(static_cast<double>(s.train.size()));

  const Rng batch_root = Rng(cfg.seeds.data).substream(kTagBatch);
  const Rng noise_root = Rng(cfg.seeds.noise).substream(kTagNoise);
  const Rng enc_root = Rng(cfg.seeds.noise).substream(kTagEncrypt);
  const Rng attack_root = attack ? Rng(attack->seed) : Rng(0);

  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<ParamVector> vectors(local.size());
    for (std::size_t k = 0; k < local.size(); ++k) {
      Rng rng = batch_root.substream({k, round});
      vectors[k] = local_vector(local[k], params, cfg, rng);
      if (local[k].role == Role::kModelAttacker) {
        Rng arng = attack_root.substream({kTagModel, k, round});
        vectors[k] = poison_update(vectors[k], *attack, arng);
      }
    }

    std::vector<ClientVector> colluders;
    for (std::size_t k = 0; k < local.size(); ++k) {
      if (local[k].role == Role::kColluder) colluders.push_back({k, Role::kColluder, vectors[k]});
    }
    if (!colluders.empty()) {
      ParamVector mean = colluders.front().vector.filled(0.0);
      for (const auto& c : colluders) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += c.vector[i];
      }
      for (double& x : mean.values()) x /= static_cast<double>(colluders.size());
      Rng crng = attack_root.substream({kTagCollude, round});
      for (auto& c : collude(colluders, mean, *attack, crng)) vectors[c.client_id] = c.vector;
    }

    std::vector<ClientUpdate> updates;
    updates.reserve(local.size());
    for (std::size_t k = 0; k < local.size(); ++k) {
      // Colluders share one noise stream so their plaintexts stay identical.
      Rng nrng = local[k].role == Role::kColluder ? noise_root.substream({kTagCollude, round})
                                                  : noise_root.substream({k, round});
      Rng erng = enc_root.substream({k, round});
      updates.push_back(package_update(k, vectors[k], cfg, pk, nrng, erng));
    }

    switch (cfg.protocol) {
      case Protocol::kFedSgd:
        params = apply_update(params, aggregate_fedsgd(updates), cfg.lr);
        break;
      case Protocol::kFedAvg:
        params = apply_update(params, aggregate_fedavg(updates, weights), 1.0);
        break;
      case Protocol::kSignSgdSecure:
        params = apply_update(params,
                              aggregate_signsgd(updates, *authority, *codec, params.layout()),
                              cfg.lr);
        break;
      case Protocol::kSignSgdPlain:
        params = apply_update(params, aggregate_sign_plain(updates), cfg.lr);
        break;
    }

    RoundRecord rec;
    rec.round = round;
    rec.attack_active = attack_active;
    for (const auto& u : updates) {
      rec.bytes_up += u.bytes_on_wire;
      rec.logical_bits_up += u.logical_bits;
    }
    rec.global_train_loss = loss(params, cfg.model, as_batch(pooled_train));
    if (!pooled_test.empty()) {
      const auto m = metrics(forward(params, cfg.model, as_batch(pooled_test)),
                             pooled_test.targets, pooled_test.scaler);
      rec.test_mse = m.mse;
      rec.test_rmse = m.rmse;
      rec.test_mape = m.mape_pct;
      for (const auto& s : shards) {
        rec.per_client_mape.push_back(
            metrics(forward(params, cfg.model, as_batch(s.test)), s.test.targets, s.test.scaler)
                .mape_pct);
      }
    }
    rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    result.records.push_back(std::move(rec));
  }
  result.final_params = std::move(params);
  return result;
}

std::optional<std::size_t> convergence_round(std::span<const double> losses, double tol,
                                             std::size_t patience) {
  if (patience < 1) throw Error(ErrorKind::kInvalidArgument, "patience must be >= 1");
  if (!(tol >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "tol must be >= 0");
  if (losses.size() < patience) return std::nullopt;
  double running_min = losses.empty() ? 0.0 : losses[0];
  for (std::size_t r = 0; r + patience <= losses.size(); ++r) {
    running_min = std::min(running_min, losses[r]);
    bool ok = true;
    for (std::size_t j = r; j < r + patience && ok; ++j) {
      ok = std::fabs(losses[j] - running_min) <= tol;
    }
    if (ok) return r;
  }
  return std::nullopt;
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> records) {
  const std::size_t n_clients = records.empty() ? 0 : records.front().per_client_mape.size();
  out << "round,global_train_loss,test_mse,test_rmse,test_mape,bytes_up,logical_bits_up,"
         "attack_active";
  for (std::size_t k = 0; k < n_clients; ++k) out << ",client_mape_" << k;
  out << '\n';
  for (const auto& r : records) {
    out << r.round << ',' << format_double(r.global_train_loss) << ','
        << format_double(r.test_mse) << ',' << format_double(r.test_rmse) << ','
        << format_double(r.test_mape) << ',' << r.bytes_up << ',' << r.logical_bits_up << ','
        << (r.attack_active ? 1 : 0);
    for (double m : r.per_client_mape) out << ',' << format_double(m);
    out << '\n';
  }
}

std::vector<RoundRecord> read_rounds_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kMalformedRow, "missing header");
  const auto count_fields = [](const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), ',')) + 1;
  };
  const std::size_t n_fields = count_fields(line);
  if (n_fields < 8 || line.rfind("round,global_train_loss", 0) != 0) {
    throw Error(ErrorKind::kMalformedRow, "unexpected rounds header");
  }
  std::vector<RoundRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != n_fields) {
      throw Error(ErrorKind::kMalformedRow, "line " + std::to_string(line_no));
    }
    const auto num = [&](const std::string& s) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw Error(ErrorKind::kMalformedRow, "line " + std::to_string(line_no) + ": '" + s + "'");
      }
      return v;
    };
    RoundRecord r;
    r.round = static_cast<std::size_t>(num(f[0]));
    r.global_train_loss = num(f[1]);
    r.test_mse = num(f[2]);
    r.test_rmse = num(f[3]);
    r.test_mape = num(f[4]);
    r.bytes_up = static_cast<std::size_t>(num(f[5]));
    r.logical_bits_up = static_cast<std::size_t>(num(f[6]));
    r.attack_active = num(f[7]) != 0.0;
    for (std::size_t i = 8; i < f.size(); ++i) r.per_client_mape.push_back(num(f[i]));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace loadfl

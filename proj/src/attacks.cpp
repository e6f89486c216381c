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

#include "loadfl/attacks.hpp"

#include <cmath>
#include <string>

#include "loadfl/error.hpp"

namespace loadfl {

std::string_view to_string(ThreatModel t) {
  switch (t) {
    case ThreatModel::kTm1: return "tm1";
    case ThreatModel::kTm2: return "tm2";
    case ThreatModel::kTm3: return "tm3";
  }
  return "?";
}

std::string_view to_string(Tm2Mode m) {
  switch (m) {
    case Tm2Mode::kSignFlip: return "sign_flip";
    case Tm2Mode::kRandomGauss: return "random_gauss";
    case Tm2Mode::kScaled: return "scaled";
  }
  return "?";
}

std::string_view to_string(CollusionStrategy s) {
  return s == CollusionStrategy::kIdenticalSignflip ? "identical_signflip" : "identical_random";
}

ThreatModel parse_threat(std::string_view s) {
  if (s == "tm1") return ThreatModel::kTm1;
  if (s == "tm2") return ThreatModel::kTm2;
  if (s == "tm3") return ThreatModel::kTm3;
  throw Error(ErrorKind::kConfig, "unknown threat model '" + std::string(s) + "'");
}

Tm2Mode parse_tm2_mode(std::string_view s) {
  if (s == "sign_flip") return Tm2Mode::kSignFlip;
  if (s == "random_gauss") return Tm2Mode::kRandomGauss;
  if (s == "scaled") return Tm2Mode::kScaled;
  throw Error(ErrorKind::kConfig, "unknown tm2 mode '" + std::string(s) + "'");
}

CollusionStrategy parse_collusion(std::string_view s) {
  if (s == "identical_signflip") return CollusionStrategy::kIdenticalSignflip;
  if (s == "identical_random") return CollusionStrategy::kIdenticalRandom;
  throw Error(ErrorKind::kConfig, "unknown collusion strategy '" + std::string(s) + "'");
}

void AttackConfig::validate() const {
  if (!(compromised_frac >= 0.0 && compromised_frac < 1.0)) {
    throw Error(ErrorKind::kConfig, "attack.compromised_frac must lie in [0, 1)");
  }
  if (!(poison_frac > 0.0 && poison_frac <= 1.0)) {
    throw Error(ErrorKind::kConfig, "attack.poison_frac must lie in (0, 1]");
  }
  if (!std::isfinite(trigger_v) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::kConfig, "attack.trigger_v and attack.gamma must be finite");
  }
}

std::size_t AttackConfig::compromised_count(std::size_t n_clients) const {
  const auto t = static_cast<std::size_t>(std::llround(compromised_frac * static_cast<double>(n_clients)));
  if (t >= n_clients && n_clients > 0) {
    throw Error(ErrorKind::kConfig, "attack would compromise every client");
  }
  return t;
}

std::vector<Role> assign_roles(std::size_t n_clients, const std::optional<AttackConfig>& cfg) {
  std::vector<Role> roles(n_clients, Role::kHonest);
  if (!cfg) return roles;
  cfg->validate();
  const std::size_t t = cfg->compromised_count(n_clients);
  if (t == 0) return roles;
  Rng rng = Rng(cfg->seed).substream(0x726f6c65);  // "role"
  const auto perm = random_permutation(n_clients, rng);
  const Role bad = cfg->threat == ThreatModel::kTm1   ? Role::kPoisoned
                   : cfg->threat == ThreatModel::kTm2 ? Role::kModelAttacker
                                                      : Role::kColluder;
  for (std::size_t i = 0; i < t; ++i) roles[perm[i]] = bad;
  return roles;
}

ClientShard poison_data(const ClientShard& shard, const AttackConfig& cfg, Rng& rng) {
  const bool ok = (shard.role == Role::kPoisoned && cfg.threat == ThreatModel::kTm1) ||
                  (shard.role == Role::kColluder && cfg.threat == ThreatModel::kTm3);
  if (!ok) {
    throw Error(ErrorKind::kRoleMismatch, "client " + std::to_string(shard.client_id) +
                                              " with role " + std::string(to_string(shard.role)) +
                                              " cannot poison data under " +
                                              std::string(to_string(cfg.threat)));
  }
  ClientShard out = shard;
  const std::size_t n = out.train.size();
  const auto k = static_cast<std::size_t>(std::ceil(cfg.poison_frac * static_cast<double>(n) - 1e-9));
  const auto perm = random_permutation(n, rng);
  for (std::size_t i = 0; i < k && i < n; ++i) {
    for (double& x : out.train.row(perm[i])) x += cfg.trigger_v;
  }
  return out;
}

ParamVector poison_update(const ParamVector& honest, const AttackConfig& cfg, Rng& rng) {
  if (cfg.threat != ThreatModel::kTm2) {
    throw Error(ErrorKind::kRoleMismatch, "model poisoning requires threat tm2");
  }
  ParamVector out = honest;
  switch (cfg.tm2_mode) {
    case Tm2Mode::kSignFlip:
      for (double& x : out.values()) x = -x;
      break;
    case Tm2Mode::kRandomGauss:
      for (double& x : out.values()) x = rng.normal();
      break;
    case Tm2Mode::kScaled:
      for (double& x : out.values()) x *= cfg.gamma;
      break;
  }
  return out;
}

std::vector<ClientVector> collude(std::span<const ClientVector> colluders,
                                  const ParamVector& colluder_mean, const AttackConfig& cfg,
                                  Rng& rng) {
  if (cfg.threat != ThreatModel::kTm3) {
    throw Error(ErrorKind::kRoleMismatch, "collusion requires threat tm3");
  }
  for (const auto& c : colluders) {
    if (c.role != Role::kColluder) {
      throw Error(ErrorKind::kRoleMismatch,
                  "client " + std::to_string(c.client_id) + " is not a colluder");
    }
    if (c.vector.size() != colluder_mean.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "colluder vector dimension differs");
    }
  }
  ParamVector crafted = colluder_mean;
  if (cfg.collusion == CollusionStrategy::kIdenticalSignflip) {
    for (double& x : crafted.values()) x = -x;
  } else {
    for (double& x : crafted.values()) x = rng.normal();
  }
  std::vector<ClientVector> out;
  out.reserve(colluders.size());
  for (const auto& c : colluders) out.push_back({c.client_id, c.role, crafted});
  return out;
}

}  // namespace loadfl

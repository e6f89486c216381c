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
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "loadfl/data.hpp"
#include "loadfl/he.hpp"
#include "loadfl/model.hpp"
#include "loadfl/rng.hpp"

namespace loadfl {

/// tm1: local data poisoning, tm2: crafted model updates, tm3: collusion
/// combining both.
enum class ThreatModel { kTm1, kTm2, kTm3 };
enum class Tm2Mode { kSignFlip, kRandomGauss, kScaled };
enum class CollusionStrategy { kIdenticalSignflip, kIdenticalRandom };

std::string_view to_string(ThreatModel t);
std::string_view to_string(Tm2Mode m);
std::string_view to_string(CollusionStrategy s);
ThreatModel parse_threat(std::string_view s);
Tm2Mode parse_tm2_mode(std::string_view s);
CollusionStrategy parse_collusion(std::string_view s);

struct AttackConfig {
  ThreatModel threat = ThreatModel::kTm1;
  double compromised_frac = 0.0;
  /// Offset added to every input lag of a poisoned sample (normalized units).
  double trigger_v = 3.0;
  double poison_frac = 0.5;
  Tm2Mode tm2_mode = Tm2Mode::kSignFlip;
  double gamma = 1.0;  // tm2 scaled mode
  CollusionStrategy collusion = CollusionStrategy::kIdenticalSignflip;
  std::uint64_t seed = 4;

  void validate() const;
  /// round(compromised_frac * n_clients); must stay below n_clients.
  std::size_t compromised_count(std::size_t n_clients) const;
};

/// Role per client id. The compromised clients are the first t ids of a
/// permutation seeded by cfg.seed. No attack means everyone is honest.
std::vector<Role> assign_roles(std::size_t n_clients, const std::optional<AttackConfig>& cfg);

/// Adds trigger_v to every input coordinate of a seeded
/// ceil(poison_frac * n)-subset of the training samples.
ClientShard poison_data(const ClientShard& shard, const AttackConfig& cfg, Rng& rng);

/// Replacement transmission of a tm2 model attacker.
ParamVector poison_update(const ParamVector& honest, const AttackConfig& cfg, Rng& rng);

struct ClientVector {
  std::size_t client_id = 0;
  Role role = Role::kHonest;
  ParamVector vector;
};

/// Coordinated tm3 payloads. Every colluder receives the same crafted vector:
/// identical_signflip sends -colluder_mean, identical_random one shared
/// N(0, 1) draw.
std::vector<ClientVector> collude(std::span<const ClientVector> colluders,
                                  const ParamVector& colluder_mean, const AttackConfig& cfg,
                                  Rng& rng);

/// What one client transmits in one round.
struct ClientUpdate {
  std::size_t client_id = 0;
  std::variant<ParamVector, std::vector<Ciphertext>> payload;
  /// Bytes a real transport would carry.
  std::size_t bytes_on_wire = 0;
  /// Information content: 64 bits per raw coordinate, 1 bit per sign plus a
  /// 64-bit noise-scale header for sign protocols.
  std::size_t logical_bits = 0;

  bool is_raw() const { return std::holds_alternative<ParamVector>(payload); }
  const ParamVector& raw() const { return std::get<ParamVector>(payload); }
  const std::vector<Ciphertext>& encrypted() const {
    return std::get<std::vector<Ciphertext>>(payload);
  }
};

}  // namespace loadfl

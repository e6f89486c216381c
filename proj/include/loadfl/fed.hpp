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
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "loadfl/attacks.hpp"
#include "loadfl/data.hpp"
#include "loadfl/dp.hpp"
#include "loadfl/he.hpp"
#include "loadfl/model.hpp"

namespace loadfl {

enum class Protocol {
  kFedSgd,        // mean of raw gradients
  kFedAvg,        // sample-weighted mean of local weight deltas
  kSignSgdSecure, // sign, perturb, encrypt; sign of the homomorphic sum
  kSignSgdPlain,  // same sign pipeline without encryption (reference path)
};

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);
bool is_sign_protocol(Protocol p);

struct Seeds {
  std::uint64_t data = 1;
  std::uint64_t init = 2;
  std::uint64_t noise = 3;
  std::uint64_t attack = 4;
  bool operator==(const Seeds&) const = default;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::kSignSgdSecure;
  ModelArch model;
  std::size_t n_clients = 10;
  std::size_t rounds = 60;
  double lr = 0.01;
  std::size_t local_epochs = 1;
  /// 0 trains on the full local shard; otherwise a seeded minibatch size.
  std::size_t minibatch = 0;
  std::optional<PrivacyBudget> dp;
  unsigned he_bits = 512;
  std::uint64_t fixed_point_scale = 1u << 16;
  Seeds seeds;

  void validate() const;
  /// Gaussian noise scale per coordinate; 0 when dp is disabled.
  double noise_sigma() const;
};

/// Telemetry of one communication round.
struct RoundRecord {
  std::size_t round = 0;
  double global_train_loss = 0.0;
  double test_mse = 0.0;
  double test_rmse = 0.0;
  double test_mape = 0.0;
  std::vector<double> per_client_mape;
  std::int64_t wall_time_ms = 0;
  std::size_t bytes_up = 0;
  std::size_t logical_bits_up = 0;
  bool attack_active = false;
};

/// Holder of the Paillier secret key. It only decrypts homomorphic sums with
/// at least `min_contributors` terms.
class KeyAuthority {
 public:
  KeyAuthority(PaillierKeypair keypair, std::size_t min_contributors);

  const PublicKey& public_key() const { return keypair_.pub; }
  std::vector<mpz_class> decrypt_aggregate(std::span<const Ciphertext> sums,
                                           std::size_t contributors) const;

 private:
  PaillierKeypair keypair_;
  std::size_t min_contributors_;
};

/// Magnitude clients promise to stay under before fixed-point encoding.
double sign_payload_bound(double sigma);

/// The vector a client derives from local training, before any attack or
/// quantization: the minibatch gradient for FedSGD, and the local weight
/// delta m_{t-1} - m_t^k for FedAvg and the sign protocols.
ParamVector local_vector(const ClientShard& shard, const ParamVector& global,
                         const ProtocolConfig& cfg, Rng& rng);

/// Quantizes/perturbs/encrypts `v` as the protocol prescribes.
ClientUpdate package_update(std::size_t client_id, const ParamVector& v,
                            const ProtocolConfig& cfg, const PublicKey* pk, Rng& noise_rng,
                            Rng& enc_rng);

/// One client's contribution to a round. Model attackers (tm2) replace their
/// vector before packaging; colluders need the round engine to coordinate and
/// behave honestly here on their own (poisoned) data.
ClientUpdate local_round(const ClientShard& shard, const ParamVector& global,
                         const ProtocolConfig& cfg, const std::optional<AttackConfig>& attack,
                         const PublicKey* pk, Rng& rng);

/// +1 for x >= 0, -1 otherwise.
ParamVector sign_vector(const ParamVector& v);

ParamVector aggregate_fedsgd(std::span<const ClientUpdate> updates);
ParamVector aggregate_fedavg(std::span<const ClientUpdate> updates,
                             std::span<const double> weights);
/// Homomorphic per-coordinate sum, decrypted by the authority, decoded and
/// reduced to its sign (sign(0) = +1).
ParamVector aggregate_signsgd(std::span<const ClientUpdate> updates,
                              const KeyAuthority& authority, const FixedPointCodec& codec,
                              const std::vector<Segment>& layout = {});
/// Plaintext sign of the coordinate sums of raw payloads.
ParamVector aggregate_sign_plain(std::span<const ClientUpdate> updates);

struct SimulationResult {
  std::vector<RoundRecord> records;
  ParamVector initial_params;
  ParamVector final_params;
};

/// Runs cfg.rounds communication rounds. Roles are (re)assigned from
/// `attack`; the shards' own role fields are ignored.
SimulationResult run_simulation(std::span<const ClientShard> shards, const ProtocolConfig& cfg,
                                const std::optional<AttackConfig>& attack);

/// Smallest r such that loss[j] stays within tol of min(loss[0..r]) for every
/// j in [r, r + patience); nullopt when no full window qualifies.
std::optional<std::size_t> convergence_round(std::span<const double> losses, double tol,
                                             std::size_t patience);

// -- record serialization ------------------------------------------------------

/// Header: round,global_train_loss,test_mse,test_rmse,test_mape,bytes_up,
/// logical_bits_up,attack_active,client_mape_0..client_mape_{N-1}.
/// Wall time is left out so files are byte-reproducible.
void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> records);
std::vector<RoundRecord> read_rounds_csv(std::istream& in);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace loadfl

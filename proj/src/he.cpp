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

#include "loadfl/he.hpp"

#include <cmath>
#include <vector>

#include <json.hpp>

#include "loadfl/error.hpp"

namespace loadfl {
namespace {

std::uint64_t hash_modulus(const mpz_class& n) {
  const std::string hex = n.get_str(16);
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (char ch : hex) h = mix64(h ^ static_cast<unsigned char>(ch));
  return h;
}

/// Uniform integer with exactly `bits` random low bits.
mpz_class random_bits(std::size_t bits, Rng& rng) {
  const std::size_t words = (bits + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  for (auto& w : buf) w = rng.next_u64();
  mpz_class out;
  mpz_import(out.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
  const std::size_t excess = words * 64 - bits;
  if (excess > 0) mpz_fdiv_r_2exp(out.get_mpz_t(), out.get_mpz_t(), bits);
  return out;
}

mpz_class random_prime(unsigned bits, Rng& rng) {
  for (;;) {
    mpz_class cand = random_bits(bits, rng);
    mpz_setbit(cand.get_mpz_t(), bits - 1);
    mpz_setbit(cand.get_mpz_t(), bits - 2);
    mpz_setbit(cand.get_mpz_t(), 0);
    mpz_class prime;
    mpz_nextprime(prime.get_mpz_t(), cand.get_mpz_t());
    if (mpz_sizeinbase(prime.get_mpz_t(), 2) == bits) return prime;
  }
}

void require_key(const PublicKey& pk, const Ciphertext& c) {
  if (c.key_id != pk.key_id) {
    throw Error(ErrorKind::kKeyMismatch, "ciphertext is bound to a different public key");
  }
}

}  // namespace

PublicKey make_public_key(const mpz_class& n) {
  PublicKey pk;
  pk.n = n;
  pk.n_squared = n * n;
  pk.key_id = hash_modulus(n);
  return pk;
}

PaillierKeypair keypair_from_primes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw Error(ErrorKind::kInvalidArgument, "Paillier primes must differ");
  const mpz_class n = p * q;
  const mpz_class pm1 = p - 1;
  const mpz_class qm1 = q - 1;
  const mpz_class phi = pm1 * qm1;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
  if (g != 1) throw Error(ErrorKind::kInvalidArgument, "gcd(n, (p-1)(q-1)) != 1");

  PaillierKeypair kp;
  kp.pub = make_public_key(n);
  kp.sec.pub = kp.pub;
  kp.sec.p = p;
  kp.sec.q = q;
  mpz_lcm(kp.sec.lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  if (mpz_invert(kp.sec.mu.get_mpz_t(), kp.sec.lambda.get_mpz_t(), n.get_mpz_t()) == 0) {
    throw Error(ErrorKind::kInvalidArgument, "lambda is not invertible mod n");
  }
  SecretKey& sk = kp.sec;
  sk.p_squared = p * p;
  sk.q_squared = q * q;
  const auto h = [&](const mpz_class& prime, const mpz_class& prime_sq) {
    const mpz_class g_mod = (n + 1) % prime_sq;
    const mpz_class e = prime - 1;
    mpz_class x;
    mpz_powm(x.get_mpz_t(), g_mod.get_mpz_t(), e.get_mpz_t(), prime_sq.get_mpz_t());
    mpz_class l = (x - 1) / prime;
    if (mpz_invert(l.get_mpz_t(), l.get_mpz_t(), prime.get_mpz_t()) == 0) {
      throw Error(ErrorKind::kInvalidArgument, "degenerate CRT constant");
    }
    return l;
  };
  sk.hp = h(p, sk.p_squared);
  sk.hq = h(q, sk.q_squared);
  if (mpz_invert(sk.q_inv.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t()) == 0) {
    throw Error(ErrorKind::kInvalidArgument, "q is not invertible mod p");
  }
  return kp;
}

PaillierKeypair keygen(unsigned bits, Rng& rng) {
  if (bits < 512 || bits % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument, "key size must be even and >= 512 bits");
  }
  for (;;) {
    const mpz_class p = random_prime(bits / 2, rng);
    const mpz_class q = random_prime(bits / 2, rng);
    if (p == q) continue;
    try {
      return keypair_from_primes(p, q);
    } catch (const Error&) {
      continue;
    }
  }
}

mpz_class random_below(const mpz_class& bound, Rng& rng) {
  if (bound <= 0) throw Error(ErrorKind::kInvalidArgument, "bound must be positive");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  for (;;) {
    mpz_class x = random_bits(bits, rng);
    if (x < bound) return x;
  }
}

Ciphertext encrypt_with_nonce(const PublicKey& pk, const mpz_class& m, const mpz_class& r) {
  if (m < 0 || m >= pk.n) {
    throw Error(ErrorKind::kPlaintextOutOfRange, "plaintext outside [0, n)");
  }
  // (1 + n)^m = 1 + m n  (mod n^2)
  mpz_class gm = m * pk.n + 1;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n_squared.get_mpz_t());
  Ciphertext c;
  c.value = gm * rn;
  mpz_mod(c.value.get_mpz_t(), c.value.get_mpz_t(), pk.n_squared.get_mpz_t());
  c.key_id = pk.key_id;
  return c;
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Rng& rng) {
  if (m < 0 || m >= pk.n) {
    throw Error(ErrorKind::kPlaintextOutOfRange, "plaintext outside [0, n)");
  }
  mpz_class r, g;
  do {
    r = random_below(pk.n, rng);
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  } while (r == 0 || g != 1);
  return encrypt_with_nonce(pk, m, r);
}

Ciphertext add_cipher(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  require_key(pk, a);
  require_key(pk, b);
  Ciphertext c;
  c.value = a.value * b.value;
  mpz_mod(c.value.get_mpz_t(), c.value.get_mpz_t(), pk.n_squared.get_mpz_t());
  c.key_id = pk.key_id;
  return c;
}

mpz_class decrypt(const SecretKey& sk, const Ciphertext& c) {
  require_key(sk.pub, c);
  const auto half = [&](const mpz_class& prime, const mpz_class& prime_sq, const mpz_class& h) {
    const mpz_class e = prime - 1;
    mpz_class x;
    mpz_powm(x.get_mpz_t(), c.value.get_mpz_t(), e.get_mpz_t(), prime_sq.get_mpz_t());
    mpz_class m = (x - 1) / prime * h;
    mpz_mod(m.get_mpz_t(), m.get_mpz_t(), prime.get_mpz_t());
    return m;
  };
  const mpz_class mp = half(sk.p, sk.p_squared, sk.hp);
  const mpz_class mq = half(sk.q, sk.q_squared, sk.hq);
  mpz_class t = (mp - mq) * sk.q_inv;
  mpz_mod(t.get_mpz_t(), t.get_mpz_t(), sk.p.get_mpz_t());
  return mq + t * sk.q;
}

void FixedPointCodec::check_headroom(double max_abs, std::size_t terms) const {
  mpz_class bound;
  mpz_set_d(bound.get_mpz_t(), std::ceil(std::fabs(max_abs) * static_cast<double>(scale)));
  bound *= static_cast<unsigned long>(terms);
  if (2 * bound >= modulus) {
    throw Error(ErrorKind::kMagnitudeOverflow, "fixed-point sum could wrap past n/2");
  }
}

mpz_class encode_fixed(double x, const FixedPointCodec& codec) {
  if (!std::isfinite(x)) throw Error(ErrorKind::kMagnitudeOverflow, "non-finite value");
  const double scaled = std::round(x * static_cast<double>(codec.scale));
  mpz_class v;
  mpz_set_d(v.get_mpz_t(), std::fabs(scaled));
  if (2 * v >= codec.modulus) {
    throw Error(ErrorKind::kMagnitudeOverflow, "|x| >= n / (2 scale)");
  }
  if (scaled < 0 && v != 0) v = codec.modulus - v;
  return v;
}

double decode_fixed(const mpz_class& m, const FixedPointCodec& codec) {
  mpz_class v = m;
  bool negative = false;
  if (2 * v > codec.modulus) {
    v = codec.modulus - v;
    negative = true;
  }
  const double magnitude = v.get_d() / static_cast<double>(codec.scale);
  return negative ? -magnitude : magnitude;
}

std::string keypair_to_json(const PaillierKeypair& kp) {
  nlohmann::ordered_json j;
  j["n"] = kp.pub.n.get_str(10);
  j["p"] = kp.sec.p.get_str(10);
  j["q"] = kp.sec.q.get_str(10);
  return j.dump(2) + "\n";
}

PaillierKeypair keypair_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const mpz_class p(j.at("p").get<std::string>(), 10);
    const mpz_class q(j.at("q").get<std::string>(), 10);
    auto kp = keypair_from_primes(p, q);
    if (j.contains("n") && mpz_class(j.at("n").get<std::string>(), 10) != kp.pub.n) {
      throw Error(ErrorKind::kKeyMismatch, "n does not equal p * q");
    }
    return kp;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("bad key JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kIo, std::string("bad key integer: ") + e.what());
  }
}

std::string public_key_to_json(const PublicKey& pk) {
  nlohmann::ordered_json j;
  j["n"] = pk.n.get_str(10);
  return j.dump(2) + "\n";
}

PublicKey public_key_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return make_public_key(mpz_class(j.at("n").get<std::string>(), 10));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("bad key JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kIo, std::string("bad key integer: ") + e.what());
  }
}

}  // namespace loadfl

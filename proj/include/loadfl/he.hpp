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

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "loadfl/rng.hpp"

namespace loadfl {

/// Paillier public key with generator g = n + 1.
struct PublicKey {
  mpz_class n;
  mpz_class n_squared;
  std::uint64_t key_id = 0;

  unsigned bits() const { return static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2)); }
  /// Size of one ciphertext on the wire, ceil(log2 n^2) / 8 rounded up.
  std::size_t ciphertext_bytes() const {
    return (mpz_sizeinbase(n_squared.get_mpz_t(), 2) + 7) / 8;
  }
};

struct SecretKey {
  PublicKey pub;
  mpz_class p;
  mpz_class q;
  mpz_class lambda;  // lcm(p-1, q-1)
  mpz_class mu;      // lambda^-1 mod n
  // CRT decryption constants.
  mpz_class p_squared;
  mpz_class q_squared;
  mpz_class hp;     // L_p((n+1)^(p-1) mod p^2)^-1 mod p
  mpz_class hq;
  mpz_class q_inv;  // q^-1 mod p
};

struct PaillierKeypair {
  PublicKey pub;
  SecretKey sec;
};

struct Ciphertext {
  mpz_class value;  // in [0, n^2)
  std::uint64_t key_id = 0;
};

/// Public key from a modulus; fills n^2 and the key id.
PublicKey make_public_key(const mpz_class& n);

/// Two random primes of bits/2 bits each (top two bits set, so n has exactly
/// `bits` bits). bits must be even and >= 512.
PaillierKeypair keygen(unsigned bits, Rng& rng);

/// Keypair from known primes; used to reload fixtures.
PaillierKeypair keypair_from_primes(const mpz_class& p, const mpz_class& q);

/// Uniform integer in [0, bound).
mpz_class random_below(const mpz_class& bound, Rng& rng);

/// c = (1 + n)^m * r^n mod n^2 with fresh r drawn from rng.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Rng& rng);
/// Same with caller-chosen r (must be in (0, n) and coprime to n).
Ciphertext encrypt_with_nonce(const PublicKey& pk, const mpz_class& m, const mpz_class& r);

/// Homomorphic addition: decrypts to (m_a + m_b) mod n.
Ciphertext add_cipher(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

/// m = L(c^lambda mod n^2) * mu mod n with L(x) = (x - 1) / n, evaluated
/// modulo p^2 and q^2 and recombined.
mpz_class decrypt(const SecretKey& sk, const Ciphertext& c);

/// Signed fixed-point mapping of reals into Z_n. Negative values wrap to
/// n - |v|, so the upper half of Z_n is the negative range.
struct FixedPointCodec {
  mpz_class modulus;
  std::uint64_t scale = 1u << 16;

  FixedPointCodec() = default;
  FixedPointCodec(const PublicKey& pk, std::uint64_t scale_ = 1u << 16)
      : modulus(pk.n), scale(scale_) {}

  /// Throws MagnitudeOverflow unless scale * max_abs * terms < n / 2.
  void check_headroom(double max_abs, std::size_t terms) const;
};

mpz_class encode_fixed(double x, const FixedPointCodec& codec);
double decode_fixed(const mpz_class& m, const FixedPointCodec& codec);

/// {"n": "...", "p": "...", "q": "..."} as decimal strings.
std::string keypair_to_json(const PaillierKeypair& kp);
PaillierKeypair keypair_from_json(const std::string& text);
std::string public_key_to_json(const PublicKey& pk);
PublicKey public_key_from_json(const std::string& text);

}  // namespace loadfl

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "veilsum/bytes.hpp"
#include "veilsum/drbg.hpp"
#include "veilsum/hash.hpp"

namespace veilsum::he {

// Additively homomorphic encryption, Paillier construction with g = n + 1:
// the product of two ciphertexts decrypts to the sum of the plaintexts mod n.

// Asset amounts are nonnegative integers in minimal currency units.
using Amount = std::uint64_t;

inline constexpr unsigned kProductionBits = 2048;

struct PublicKey {
    mpz_class n;           // product of two distinct odd primes
    unsigned bit_length;   // bit length of n
    Digest16 fingerprint;  // of the canonical key encoding
    bool production;       // false for key sizes below kProductionBits

    mpz_class n_squared() const { return n * n; }
    Bytes encode() const;
    static PublicKey from_modulus(const mpz_class& n);
    static PublicKey decode(std::span<const std::uint8_t> data);
};

struct PrivateKey {
    mpz_class lambda;  // lcm(p-1, q-1)
    mpz_class mu;      // (L(g^lambda mod n^2))^-1 mod n
    mpz_class n;
};

struct Ciphertext {
    mpz_class value;  // in [1, n^2 - 1], coprime to n
    Digest16 key_fingerprint;

    Bytes encode() const;
    static Ciphertext decode(std::span<const std::uint8_t> data);
};

// Deterministic given the rng stream. bit_length must be even and >= 16;
// sizes below kProductionBits yield a key flagged non-production.
std::pair<PublicKey, PrivateKey> keygen(unsigned bit_length, Drbg& rng);

// Direct construction from known primes; used for toy moduli in tests.
std::pair<PublicKey, PrivateKey> keypair_from_primes(const mpz_class& p, const mpz_class& q);

// c = (1+n)^m * r^n mod n^2 with r uniform in the units mod n. 0 <= m < n.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Drbg& rng);
Ciphertext encrypt(const PublicKey& pk, Amount m, Drbg& rng);
// Fixed-blinding variant for worked examples; r must be a unit mod n.
Ciphertext encrypt_with_blinding(const PublicKey& pk, const mpz_class& m, const mpz_class& r);

// m = L(c^lambda mod n^2) * mu mod n. Throws FingerprintMismatch when the
// ciphertext was made under a different key, Error when c shares a factor
// with n.
mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c);
// Narrowing convenience for protocol amounts; throws if the plaintext
// exceeds the Amount range.
Amount decrypt_amount(const PrivateKey& sk, const Ciphertext& c);

// Homomorphic addition: value = c1*c2 mod n^2. All fingerprints must match.
Ciphertext add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);
// Left fold of add over a nonempty list.
Ciphertext add_many(const PublicKey& pk, std::span<const Ciphertext> cs);

}  // namespace veilsum::he

#pragma once

#include <gmpxx.h>

#include "veilsum/bytes.hpp"

namespace veilsum {

class Drbg;

// Minimal big-endian byte encoding; zero encodes as the empty string.
Bytes mpz_to_bytes(const mpz_class& v);
mpz_class mpz_from_bytes(std::span<const std::uint8_t> b);

// Length-prefixed canonical forms used by every wire format.
void put_mpz(ByteWriter& w, const mpz_class& v);
mpz_class get_mpz(ByteReader& r);

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod);
mpz_class invmod(const mpz_class& a, const mpz_class& mod);  // throws Error when not invertible

// Deterministic Miller-Rabin: bases are derived from the candidate itself, so
// the verdict does not depend on the GMP build.
bool is_probable_prime(const mpz_class& n, int rounds = 40);

// Random prime with exactly `bits` bits, candidates drawn from `rng`.
mpz_class gen_prime(unsigned bits, Drbg& rng);

}  // namespace veilsum

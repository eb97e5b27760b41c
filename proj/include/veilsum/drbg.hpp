#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string_view>

#include "veilsum/bytes.hpp"
#include "veilsum/hash.hpp"

namespace veilsum {

// Deterministic byte generator ("veilsum-drbg/v1"): SHA-256 in counter mode
// over a 32-byte key. All protocol randomness flows from one scenario seed
// through labeled children of this generator, so transcripts are reproducible
// across machines. Children are independent streams: consuming from one never
// shifts another, which keeps per-entity byte streams stable when unrelated
// entities are added to a scenario.
class Drbg {
public:
    explicit Drbg(std::uint64_t seed);
    explicit Drbg(std::span<const std::uint8_t> key_material);

    // Derives an independent child stream. Labels are part of the wire-level
    // determinism contract; renaming one changes every downstream transcript.
    Drbg child(std::string_view label) const;

    void fill(std::span<std::uint8_t> out);
    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();

    // Uniform value in [0, bound) by rejection sampling; bound must be > 0.
    mpz_class mpz_below(const mpz_class& bound);
    // Uniform integer with exactly `bits` bits (top bit set); bits >= 2.
    mpz_class mpz_bits(unsigned bits);

private:
    Digest32 key_{};
    std::uint64_t counter_ = 0;
};

}  // namespace veilsum

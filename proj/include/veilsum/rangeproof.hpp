#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <vector>

#include "veilsum/bytes.hpp"
#include "veilsum/drbg.hpp"
#include "veilsum/group.hpp"

namespace veilsum::zkp {

// Interval-membership proofs over Pedersen commitments. An interval (lo, hi]
// is proven by committing to the bits of v-lo-1 and of hi-v, showing each
// committed bit is 0 or 1 with a Fiat-Shamir OR-proof, and linking the
// weighted bit products back to the main commitment with two Schnorr proofs.
// The conjunction pins v to exactly (lo, hi] whenever hi-lo <= 2^k.

using Amount = std::uint64_t;

struct PedersenCommitment {
    mpz_class point;  // g^v * h^r mod p

    bool operator==(const PedersenCommitment&) const = default;
};

// C = g^v h^r. Requires 0 <= v < q and 0 <= r < q.
PedersenCommitment commit(const GroupParams& params, const mpz_class& v, const mpz_class& r);

// Half-open interval (lo, hi].
struct Interval {
    Amount lo = 0;
    Amount hi = 0;

    bool contains(Amount v) const { return v > lo && v <= hi; }
    bool operator==(const Interval&) const = default;
};

struct RangeStatement {
    std::vector<Interval> intervals;  // nonempty, sorted ascending, pairwise disjoint

    // Throws StatementInvalid when the invariants fail.
    void validate() const;
    // Default proof bit width: bit length of the widest interval.
    std::uint32_t default_bit_width() const;
    std::optional<std::uint32_t> containing_index(Amount v) const;

    void encode_into(ByteWriter& w) const;
    static RangeStatement decode_from(ByteReader& r);
};

// Proof that one committed bit is 0 or 1 (Fiat-Shamir OR-composition of two
// Schnorr proofs; the fake branch is simulated).
struct BitOrProof {
    mpz_class a0, a1;  // announcements
    mpz_class c0, c1;  // challenge split, c0+c1 = derived challenge mod q
    mpz_class z0, z1;  // responses
};

// Schnorr proof of knowledge of log_h(Y) linking the weighted product of bit
// commitments to the shifted main commitment.
struct LinkProof {
    mpz_class a;
    mpz_class z;
};

struct MembershipProof {
    std::uint32_t bit_width_k = 0;
    std::vector<mpz_class> bit_commitments_low;   // bits of v-lo-1
    std::vector<mpz_class> bit_commitments_high;  // bits of hi-v
    std::vector<BitOrProof> or_proofs_low;
    std::vector<BitOrProof> or_proofs_high;
    LinkProof link_low;
    LinkProof link_high;

    Bytes encode() const;
    static MembershipProof decode(std::span<const std::uint8_t> data);
};

// Prover side. Requires lo < v <= hi (refuses otherwise; a prover never
// fabricates), hi-lo <= 2^k, 1 <= k <= 63, and the commitment opening (v, r).
MembershipProof prove_membership(const GroupParams& params, Amount v, const mpz_class& r,
                                 const Interval& interval, std::uint32_t k, Drbg& rng);

// Verifier side; all inputs untrusted, malformed input yields false.
bool verify_membership(const GroupParams& params, const PedersenCommitment& commitment,
                       const Interval& interval, const MembershipProof& proof);

struct ProofBundle {
    PedersenCommitment commitment;
    std::optional<std::uint32_t> matched_index;  // absent: no interval contains v
    std::optional<MembershipProof> proof;        // present iff matched_index is

    Bytes encode() const;
    static ProofBundle decode(std::span<const std::uint8_t> data);
};

struct Verdict {
    enum class Kind { Labels, NoMatch, Rejected };
    Kind kind = Kind::Rejected;
    std::vector<bool> labels;  // per-interval True/False; at most one True

    std::optional<std::uint32_t> true_index() const;
    std::string to_string() const;
};

// Commits to v with a fresh blinding factor and proves membership in the
// containing interval when there is one.
ProofBundle respond(const GroupParams& params, Amount v, const RangeStatement& statement,
                    Drbg& rng);

// True at the matched interval implies False everywhere else (the statement
// intervals are disjoint by precondition). A failed proof yields Rejected.
Verdict verify_bundle(const GroupParams& params, const ProofBundle& bundle,
                      const RangeStatement& statement);

}  // namespace veilsum::zkp

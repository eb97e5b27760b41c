#include "veilsum/rangeproof.hpp"

#include <bit>

#include "veilsum/errors.hpp"
#include "veilsum/hash.hpp"
#include "veilsum/mpzutil.hpp"

namespace veilsum::zkp {

static constexpr std::string_view kFsTag = "veilsum/fs/v1";
static constexpr std::string_view kFsChallengeTag = "veilsum/fs/v1/chal";
static constexpr std::string_view kProofTag = "veilsum/zkproof/v1";
static constexpr std::string_view kBundleTag = "veilsum/zkbundle/v1";

// Statement widths (and so proof exponents) stay below 2^62; amounts at desk
// scale are far smaller.
static constexpr Amount kMaxBound = Amount{1} << 62;

PedersenCommitment commit(const GroupParams& params, const mpz_class& v, const mpz_class& r) {
    if (v < 0 || v >= params.q) throw Error("commit: value out of range [0, q)");
    if (r < 0 || r >= params.q) throw Error("commit: blinding out of range [0, q)");
    return PedersenCommitment{params.mul(params.exp(params.g, v), params.exp(params.h, r))};
}

void RangeStatement::validate() const {
    if (intervals.empty()) throw StatementInvalid("statement lists no intervals");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const Interval& iv = intervals[i];
        if (iv.lo >= iv.hi) throw StatementInvalid("interval bounds must satisfy lo < hi");
        if (iv.hi >= kMaxBound) throw StatementInvalid("interval bound exceeds supported range");
        if (i > 0 && intervals[i - 1].lo >= iv.lo)
            throw StatementInvalid("intervals not sorted ascending");
        if (i > 0 && intervals[i - 1].hi > iv.lo) throw StatementInvalid("intervals overlap");
    }
}

std::uint32_t RangeStatement::default_bit_width() const {
    Amount widest = 0;
    for (const Interval& iv : intervals) widest = std::max(widest, iv.hi - iv.lo);
    return std::max(1, 64 - std::countl_zero(widest));
}

std::optional<std::uint32_t> RangeStatement::containing_index(Amount v) const {
    for (std::size_t i = 0; i < intervals.size(); ++i)
        if (intervals[i].contains(v)) return static_cast<std::uint32_t>(i);
    return std::nullopt;
}

void RangeStatement::encode_into(ByteWriter& w) const {
    w.put_u32(static_cast<std::uint32_t>(intervals.size()));
    for (const Interval& iv : intervals) {
        w.put_u64(iv.lo);
        w.put_u64(iv.hi);
    }
}

RangeStatement RangeStatement::decode_from(ByteReader& r) {
    std::uint32_t n = r.get_u32();
    if (n > 4096) throw MalformedData("statement interval count implausible");
    RangeStatement st;
    st.intervals.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        Interval iv;
        iv.lo = r.get_u64();
        iv.hi = r.get_u64();
        st.intervals.push_back(iv);
    }
    return st;
}

Bytes MembershipProof::encode() const {
    ByteWriter w;
    w.put_str(kProofTag);
    w.put_u32(bit_width_k);
    for (const auto& b : bit_commitments_low) put_mpz(w, b);
    for (const auto& b : bit_commitments_high) put_mpz(w, b);
    auto put_or = [&w](const BitOrProof& orp) {
        put_mpz(w, orp.a0);
        put_mpz(w, orp.a1);
        put_mpz(w, orp.c0);
        put_mpz(w, orp.c1);
        put_mpz(w, orp.z0);
        put_mpz(w, orp.z1);
    };
    for (const auto& orp : or_proofs_low) put_or(orp);
    for (const auto& orp : or_proofs_high) put_or(orp);
    put_mpz(w, link_low.a);
    put_mpz(w, link_low.z);
    put_mpz(w, link_high.a);
    put_mpz(w, link_high.z);
    return w.take();
}

MembershipProof MembershipProof::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.get_str() != kProofTag) throw MalformedData("not a membership proof encoding");
    MembershipProof proof;
    proof.bit_width_k = r.get_u32();
    if (proof.bit_width_k < 1 || proof.bit_width_k > 63)
        throw MalformedData("proof bit width out of range");
    auto get_side = [&r](std::uint32_t k) {
        std::vector<mpz_class> v;
        v.reserve(k);
        for (std::uint32_t i = 0; i < k; ++i) v.push_back(get_mpz(r));
        return v;
    };
    proof.bit_commitments_low = get_side(proof.bit_width_k);
    proof.bit_commitments_high = get_side(proof.bit_width_k);
    auto get_ors = [&r](std::uint32_t k) {
        std::vector<BitOrProof> v;
        v.reserve(k);
        for (std::uint32_t i = 0; i < k; ++i) {
            BitOrProof orp;
            orp.a0 = get_mpz(r);
            orp.a1 = get_mpz(r);
            orp.c0 = get_mpz(r);
            orp.c1 = get_mpz(r);
            orp.z0 = get_mpz(r);
            orp.z1 = get_mpz(r);
            v.push_back(std::move(orp));
        }
        return v;
    };
    proof.or_proofs_low = get_ors(proof.bit_width_k);
    proof.or_proofs_high = get_ors(proof.bit_width_k);
    proof.link_low.a = get_mpz(r);
    proof.link_low.z = get_mpz(r);
    proof.link_high.a = get_mpz(r);
    proof.link_high.z = get_mpz(r);
    r.require_end();
    return proof;
}

static mpz_class mod_q(const GroupParams& params, const mpz_class& x) {
    mpz_class out;
    mpz_mod(out.get_mpz_t(), x.get_mpz_t(), params.q.get_mpz_t());
    return out;
}

// The challenge seed binds the group, the commitment, the interval, the bit
// width, every bit commitment and every announcement. Challenges for the
// individual sub-proofs are derived from the seed by role and index.
static Digest32 challenge_seed(const GroupParams& params, const PedersenCommitment& commitment,
                               const Interval& interval, const MembershipProof& proof) {
    ByteWriter w;
    w.put_blob(params.encode());
    put_mpz(w, commitment.point);
    w.put_u64(interval.lo);
    w.put_u64(interval.hi);
    w.put_u32(proof.bit_width_k);
    for (const auto& b : proof.bit_commitments_low) put_mpz(w, b);
    for (const auto& b : proof.bit_commitments_high) put_mpz(w, b);
    for (const auto& orp : proof.or_proofs_low) {
        put_mpz(w, orp.a0);
        put_mpz(w, orp.a1);
    }
    for (const auto& orp : proof.or_proofs_high) {
        put_mpz(w, orp.a0);
        put_mpz(w, orp.a1);
    }
    put_mpz(w, proof.link_low.a);
    put_mpz(w, proof.link_high.a);

    Sha256 h;
    h.update(kFsTag).update(w.bytes());
    return h.finish();
}

static mpz_class derive_challenge(const GroupParams& params, const Digest32& seed,
                                  std::string_view role, std::uint32_t index) {
    ByteWriter w;
    w.put_raw(seed);
    w.put_str(role);
    w.put_u32(index);
    std::size_t q_len = mpz_to_bytes(params.q).size();
    return mpz_from_bytes(hash_expand(kFsChallengeTag, w.bytes(), q_len + 16)) % params.q;
}

namespace {

// Prover-side working state for one decomposition side (low or high).
struct SideState {
    std::vector<int> bits;
    std::vector<mpz_class> blinds;    // s_i
    std::vector<mpz_class> real_w;    // announcement exponent of the real branch
    std::vector<mpz_class> commitments;
    std::vector<BitOrProof> ors;      // fake branch pre-filled; real branch finished later
    mpz_class blind_sum;              // sum s_i * 2^i mod q
};

}  // namespace

static SideState build_side(const GroupParams& params, Amount x, std::uint32_t k,
                            const mpz_class& g_inv, Drbg& rng) {
    SideState st;
    st.bits.resize(k);
    st.blinds.resize(k);
    st.real_w.resize(k);
    st.commitments.resize(k);
    st.ors.resize(k);
    st.blind_sum = 0;

    for (std::uint32_t i = 0; i < k; ++i) {
        int bit = static_cast<int>((x >> i) & 1);
        mpz_class s = rng.mpz_below(params.q);
        mpz_class b_point = params.exp(params.h, s);
        if (bit == 1) b_point = params.mul(b_point, params.g);

        st.bits[i] = bit;
        st.blinds[i] = s;
        st.commitments[i] = b_point;

        mpz_class weight;
        mpz_pow_ui(weight.get_mpz_t(), mpz_class(2).get_mpz_t(), i);
        st.blind_sum = mod_q(params, st.blind_sum + s * weight);

        // Simulate the branch the bit does not satisfy, commit honestly to
        // the branch it does.
        BitOrProof& orp = st.ors[i];
        mpz_class w = rng.mpz_below(params.q);
        st.real_w[i] = w;
        if (bit == 0) {
            orp.a0 = params.exp(params.h, w);
            orp.c1 = rng.mpz_below(params.q);
            orp.z1 = rng.mpz_below(params.q);
            mpz_class shifted = params.mul(b_point, g_inv);  // B/g = h^s would need bit 1
            orp.a1 = params.mul(params.exp(params.h, orp.z1),
                                params.inv(params.exp(shifted, orp.c1)));
        } else {
            orp.a1 = params.exp(params.h, w);
            orp.c0 = rng.mpz_below(params.q);
            orp.z0 = rng.mpz_below(params.q);
            orp.a0 = params.mul(params.exp(params.h, orp.z0),
                                params.inv(params.exp(b_point, orp.c0)));
        }
    }
    return st;
}

MembershipProof prove_membership(const GroupParams& params, Amount v, const mpz_class& r,
                                 const Interval& interval, std::uint32_t k, Drbg& rng) {
    if (k < 1 || k > 63) throw Error("prove: bit width must be in [1, 63]");
    if (interval.lo >= interval.hi || interval.hi >= kMaxBound)
        throw Error("prove: malformed interval");
    if (!interval.contains(v)) throw Error("prove: value outside interval, refusing");
    Amount width = interval.hi - interval.lo;
    if (width > (Amount{1} << k)) throw Error("prove: bit width too small for interval");
    if (r < 0 || r >= params.q) throw Error("prove: blinding out of range");

    const Amount x_low = v - interval.lo - 1;
    const Amount x_high = interval.hi - v;
    const mpz_class g_inv = params.inv(params.g);

    MembershipProof proof;
    proof.bit_width_k = k;

    SideState low = build_side(params, x_low, k, g_inv, rng);
    SideState high = build_side(params, x_high, k, g_inv, rng);

    // Link announcements must be fixed before the challenge seed.
    mpz_class w_low = rng.mpz_below(params.q);
    mpz_class w_high = rng.mpz_below(params.q);
    proof.link_low.a = params.exp(params.h, w_low);
    proof.link_high.a = params.exp(params.h, w_high);

    proof.bit_commitments_low = low.commitments;
    proof.bit_commitments_high = high.commitments;
    proof.or_proofs_low = low.ors;
    proof.or_proofs_high = high.ors;

    PedersenCommitment commitment = commit(params, mpz_class(static_cast<unsigned long>(v)), r);
    Digest32 seed = challenge_seed(params, commitment, interval, proof);

    auto finish_side = [&](SideState& st, std::vector<BitOrProof>& out, std::uint32_t base) {
        for (std::uint32_t i = 0; i < k; ++i) {
            mpz_class c = derive_challenge(params, seed, "or", base + i);
            BitOrProof& orp = st.ors[i];
            if (st.bits[i] == 0) {
                orp.c0 = mod_q(params, c - orp.c1);
                orp.z0 = mod_q(params, st.real_w[i] + orp.c0 * st.blinds[i]);
            } else {
                orp.c1 = mod_q(params, c - orp.c0);
                orp.z1 = mod_q(params, st.real_w[i] + orp.c1 * st.blinds[i]);
            }
            out[i] = orp;
        }
    };
    finish_side(low, proof.or_proofs_low, 0);
    finish_side(high, proof.or_proofs_high, k);

    // delta_low = r - sum(s_i 2^i): opens Y_low = C*g^-(lo+1) / prod(B_i^2^i).
    mpz_class delta_low = mod_q(params, r - low.blind_sum);
    mpz_class c_low = derive_challenge(params, seed, "link", 0);
    proof.link_low.z = mod_q(params, w_low + c_low * delta_low);

    // delta_high = -r - sum(s'_i 2^i): opens Y_high = g^hi*C^-1 / prod(B'_i^2^i).
    mpz_class delta_high = mod_q(params, -r - high.blind_sum);
    mpz_class c_high = derive_challenge(params, seed, "link", 1);
    proof.link_high.z = mod_q(params, w_high + c_high * delta_high);

    return proof;
}

static mpz_class weighted_product(const GroupParams& params, const std::vector<mpz_class>& points) {
    mpz_class acc = 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
        mpz_class weight;
        mpz_pow_ui(weight.get_mpz_t(), mpz_class(2).get_mpz_t(), i);
        acc = params.mul(acc, params.exp(points[i], weight));
    }
    return acc;
}

bool verify_membership(const GroupParams& params, const PedersenCommitment& commitment,
                       const Interval& interval, const MembershipProof& proof) {
    const std::uint32_t k = proof.bit_width_k;
    if (k < 1 || k > 63) return false;
    if (interval.lo >= interval.hi || interval.hi >= kMaxBound) return false;
    if (interval.hi - interval.lo > (Amount{1} << k)) return false;
    if (proof.bit_commitments_low.size() != k || proof.bit_commitments_high.size() != k ||
        proof.or_proofs_low.size() != k || proof.or_proofs_high.size() != k)
        return false;

    if (!params.element_in_group(commitment.point)) return false;

    auto or_proof_well_formed = [&](const BitOrProof& orp) {
        return params.element_in_group(orp.a0) && params.element_in_group(orp.a1) &&
               params.scalar_in_range(orp.c0) && params.scalar_in_range(orp.c1) &&
               params.scalar_in_range(orp.z0) && params.scalar_in_range(orp.z1);
    };
    if (!params.element_in_group(proof.link_low.a) || !params.scalar_in_range(proof.link_low.z) ||
        !params.element_in_group(proof.link_high.a) || !params.scalar_in_range(proof.link_high.z))
        return false;

    Digest32 seed = challenge_seed(params, commitment, interval, proof);
    const mpz_class g_inv = params.inv(params.g);

    auto check_side = [&](const std::vector<mpz_class>& commitments,
                          const std::vector<BitOrProof>& ors, std::uint32_t base) {
        for (std::uint32_t i = 0; i < k; ++i) {
            const mpz_class& b_point = commitments[i];
            const BitOrProof& orp = ors[i];
            if (!params.element_in_group(b_point)) return false;
            if (!or_proof_well_formed(orp)) return false;
            mpz_class c = derive_challenge(params, seed, "or", base + i);
            if (mod_q(params, orp.c0 + orp.c1) != c) return false;
            // Branch 0: B = h^s. Branch 1: B/g = h^s.
            if (params.exp(params.h, orp.z0) !=
                params.mul(orp.a0, params.exp(b_point, orp.c0)))
                return false;
            mpz_class shifted = params.mul(b_point, g_inv);
            if (params.exp(params.h, orp.z1) !=
                params.mul(orp.a1, params.exp(shifted, orp.c1)))
                return false;
        }
        return true;
    };
    if (!check_side(proof.bit_commitments_low, proof.or_proofs_low, 0)) return false;
    if (!check_side(proof.bit_commitments_high, proof.or_proofs_high, k)) return false;

    // Low link: C * g^-(lo+1) / prod B_i^(2^i) must be a pure h-power known
    // to the prover.
    {
        mpz_class product = weighted_product(params, proof.bit_commitments_low);
        mpz_class shift = params.exp(params.g, mpz_class(static_cast<unsigned long>(interval.lo)) + 1);
        mpz_class y = params.mul(params.mul(commitment.point, params.inv(shift)),
                                 params.inv(product));
        mpz_class c = derive_challenge(params, seed, "link", 0);
        if (params.exp(params.h, proof.link_low.z) !=
            params.mul(proof.link_low.a, params.exp(y, c)))
            return false;
    }
    // High link: g^hi * C^-1 / prod B'_i^(2^i).
    {
        mpz_class product = weighted_product(params, proof.bit_commitments_high);
        mpz_class shift = params.exp(params.g, mpz_class(static_cast<unsigned long>(interval.hi)));
        mpz_class y = params.mul(params.mul(shift, params.inv(commitment.point)),
                                 params.inv(product));
        mpz_class c = derive_challenge(params, seed, "link", 1);
        if (params.exp(params.h, proof.link_high.z) !=
            params.mul(proof.link_high.a, params.exp(y, c)))
            return false;
    }
    return true;
}

Bytes ProofBundle::encode() const {
    ByteWriter w;
    w.put_str(kBundleTag);
    put_mpz(w, commitment.point);
    if (matched_index.has_value() && proof.has_value()) {
        w.put_u8(1);
        w.put_u32(*matched_index);
        w.put_blob(proof->encode());
    } else {
        w.put_u8(0);
    }
    return w.take();
}

ProofBundle ProofBundle::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.get_str() != kBundleTag) throw MalformedData("not a proof bundle encoding");
    ProofBundle bundle;
    bundle.commitment.point = get_mpz(r);
    std::uint8_t matched = r.get_u8();
    if (matched == 1) {
        bundle.matched_index = r.get_u32();
        bundle.proof = MembershipProof::decode(r.get_blob());
    } else if (matched != 0) {
        throw MalformedData("bad match flag");
    }
    r.require_end();
    return bundle;
}

std::optional<std::uint32_t> Verdict::true_index() const {
    if (kind != Kind::Labels) return std::nullopt;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) return static_cast<std::uint32_t>(i);
    return std::nullopt;
}

std::string Verdict::to_string() const {
    switch (kind) {
        case Kind::NoMatch:
            return "NoMatch";
        case Kind::Rejected:
            return "Rejected";
        case Kind::Labels: {
            std::string s = "[";
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (i > 0) s += ",";
                s += labels[i] ? "True" : "False";
            }
            return s + "]";
        }
    }
    return "Rejected";
}

ProofBundle respond(const GroupParams& params, Amount v, const RangeStatement& statement,
                    Drbg& rng) {
    statement.validate();
    mpz_class r = rng.mpz_below(params.q);
    PedersenCommitment commitment = commit(params, mpz_class(static_cast<unsigned long>(v)), r);

    ProofBundle bundle;
    bundle.commitment = commitment;
    std::optional<std::uint32_t> idx = statement.containing_index(v);
    if (idx.has_value()) {
        std::uint32_t k = statement.default_bit_width();
        bundle.matched_index = idx;
        bundle.proof = prove_membership(params, v, r, statement.intervals[*idx], k, rng);
    }
    return bundle;
}

Verdict verify_bundle(const GroupParams& params, const ProofBundle& bundle,
                      const RangeStatement& statement) {
    statement.validate();
    Verdict verdict;
    if (!bundle.matched_index.has_value()) {
        verdict.kind = Verdict::Kind::NoMatch;
        return verdict;
    }
    if (*bundle.matched_index >= statement.intervals.size() || !bundle.proof.has_value()) {
        verdict.kind = Verdict::Kind::Rejected;
        return verdict;
    }
    const Interval& iv = statement.intervals[*bundle.matched_index];
    if (!verify_membership(params, bundle.commitment, iv, *bundle.proof)) {
        verdict.kind = Verdict::Kind::Rejected;
        return verdict;
    }
    // Disjoint statement intervals: membership in the matched one implies
    // non-membership everywhere else.
    verdict.kind = Verdict::Kind::Labels;
    verdict.labels.assign(statement.intervals.size(), false);
    verdict.labels[*bundle.matched_index] = true;
    return verdict;
}

}  // namespace veilsum::zkp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"
#include "veilsum/rangeproof.hpp"

using namespace veilsum;
using namespace veilsum::zkp;

static const GroupParams& params() {
    static GroupParams gp = group_setup(GroupProfile::test);
    return gp;
}

// Containment oracle: plain integer comparisons, independent of the proof
// machinery under test.
static bool oracle_contains(Amount lo, Amount hi, Amount v) {
    return lo < v && v <= hi;
}

TEST_CASE("group setup is deterministic and well-formed") {
    GroupParams a = group_setup(GroupProfile::test);
    GroupParams b = group_setup(GroupProfile::test);
    CHECK(a.encode() == b.encode());
    CHECK(a.g != a.h);
    CHECK(powm(a.g, a.q, a.p) == 1);
    CHECK(powm(a.h, a.q, a.p) == 1);
    CHECK(is_probable_prime(a.p));
    CHECK(is_probable_prime(a.q));
    CHECK((a.p - 1) % a.q == 0);
    CHECK_THROWS_AS(group_setup("bogus"), Error);
}

TEST_CASE("full-profile group order has at least 250 bits") {
    GroupParams full = group_setup(GroupProfile::full);
    CHECK(mpz_sizeinbase(full.q.get_mpz_t(), 2) >= 250);
    CHECK(powm(full.g, full.q, full.p) == 1);
    CHECK(powm(full.h, full.q, full.p) == 1);
}

TEST_CASE("commitment basics") {
    const GroupParams& gp = params();
    CHECK(commit(gp, 0, 0).point == 1);
    CHECK(commit(gp, 5, 3).point != commit(gp, 5, 4).point);
    CHECK_THROWS_AS(commit(gp, gp.q, 0), Error);
    CHECK_THROWS_AS(commit(gp, 0, gp.q), Error);
}

TEST_CASE("commitments are homomorphic in value and blinding") {
    const GroupParams& gp = params();
    Drbg rng(31);
    for (int i = 0; i < 100; ++i) {
        mpz_class a = rng.mpz_below(gp.q), ra = rng.mpz_below(gp.q);
        mpz_class b = rng.mpz_below(gp.q), rb = rng.mpz_below(gp.q);
        mpz_class lhs = gp.mul(commit(gp, a, ra).point, commit(gp, b, rb).point);
        mpz_class rhs = commit(gp, (a + b) % gp.q, (ra + rb) % gp.q).point;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("membership proof verifies inside the interval") {
    const GroupParams& gp = params();
    Drbg rng(32);
    Interval iv{100, 200};
    REQUIRE(oracle_contains(iv.lo, iv.hi, 150));
    mpz_class r = rng.mpz_below(gp.q);
    MembershipProof proof = prove_membership(gp, 150, r, iv, 7, rng);
    PedersenCommitment c = commit(gp, 150, r);
    CHECK(verify_membership(gp, c, iv, proof));
}

TEST_CASE("upper bound is inclusive, lower bound exclusive") {
    const GroupParams& gp = params();
    Drbg rng(33);
    Interval iv{100, 200};
    mpz_class r = rng.mpz_below(gp.q);

    MembershipProof at_hi = prove_membership(gp, 200, r, iv, 7, rng);
    CHECK(verify_membership(gp, commit(gp, 200, r), iv, at_hi));

    CHECK_THROWS_AS(prove_membership(gp, 100, r, iv, 7, rng), Error);
    CHECK_THROWS_AS(prove_membership(gp, 201, r, iv, 7, rng), Error);
}

TEST_CASE("prover refuses an undersized bit width") {
    const GroupParams& gp = params();
    Drbg rng(34);
    CHECK_THROWS_AS(prove_membership(gp, 150, 1, Interval{0, 300}, 7, rng), Error);
}

TEST_CASE("proof serialization roundtrips") {
    const GroupParams& gp = params();
    Drbg rng(35);
    mpz_class r = rng.mpz_below(gp.q);
    MembershipProof proof = prove_membership(gp, 9, r, Interval{0, 16}, 4, rng);
    MembershipProof back = MembershipProof::decode(proof.encode());
    CHECK(back.encode() == proof.encode());
    CHECK(verify_membership(gp, commit(gp, 9, r), Interval{0, 16}, back));
}

TEST_CASE("sampled byte mutations are rejected") {
    const GroupParams& gp = params();
    Drbg rng(36);
    mpz_class r = rng.mpz_below(gp.q);
    Interval iv{0, 16};
    MembershipProof proof = prove_membership(gp, 9, r, iv, 4, rng);
    PedersenCommitment c = commit(gp, 9, r);
    Bytes wire = proof.encode();
    // The exhaustive sweep lives in the acceptance suite; here sample every
    // seventh byte position.
    for (std::size_t i = 0; i < wire.size(); i += 7) {
        Bytes mutated = wire;
        mutated[i] ^= 0x01;
        bool ok = false;
        try {
            ok = verify_membership(gp, c, iv, MembershipProof::decode(mutated));
        } catch (const MalformedData&) {
            ok = false;
        }
        CHECK_FALSE(ok);
    }
}

TEST_CASE("a proof does not transfer to another commitment or interval") {
    const GroupParams& gp = params();
    Drbg rng(37);
    mpz_class r = rng.mpz_below(gp.q);
    Interval iv{100, 200};
    MembershipProof proof = prove_membership(gp, 150, r, iv, 7, rng);

    PedersenCommitment foreign = commit(gp, 151, r);
    CHECK_FALSE(verify_membership(gp, foreign, iv, proof));

    PedersenCommitment c = commit(gp, 150, r);
    CHECK_FALSE(verify_membership(gp, c, Interval{200, 300}, proof));
    CHECK_FALSE(verify_membership(gp, c, Interval{100, 228}, proof));
}

TEST_CASE("statement validation") {
    RangeStatement good{{Interval{0, 50}, Interval{50, 100}}};
    CHECK_NOTHROW(good.validate());
    CHECK(good.default_bit_width() == 6);

    CHECK_THROWS_AS(RangeStatement{}.validate(), StatementInvalid);
    CHECK_THROWS_AS((RangeStatement{{Interval{10, 10}}}).validate(), StatementInvalid);
    CHECK_THROWS_AS((RangeStatement{{Interval{0, 60}, Interval{50, 100}}}).validate(),
                    StatementInvalid);
    CHECK_THROWS_AS((RangeStatement{{Interval{50, 100}, Interval{0, 50}}}).validate(),
                    StatementInvalid);
}

TEST_CASE("respond matches the containment oracle") {
    const GroupParams& gp = params();
    Drbg rng(38);

    SUBCASE("value in the first interval") {
        RangeStatement st{{Interval{100, 200}, Interval{200, 300}}};
        ProofBundle bundle = respond(gp, 150, st, rng);
        REQUIRE(bundle.matched_index.has_value());
        CHECK(*bundle.matched_index == 0);
        CHECK(oracle_contains(100, 200, 150));
    }
    SUBCASE("value in the second interval") {
        RangeStatement st{{Interval{0, 50}, Interval{50, 100}}};
        ProofBundle bundle = respond(gp, 60, st, rng);
        REQUIRE(bundle.matched_index.has_value());
        CHECK(*bundle.matched_index == 1);
        CHECK(oracle_contains(50, 100, 60));
    }
    SUBCASE("zero is excluded by the half-open lower bound") {
        RangeStatement st{{Interval{0, 100}}};
        ProofBundle bundle = respond(gp, 0, st, rng);
        CHECK_FALSE(bundle.matched_index.has_value());
        CHECK_FALSE(bundle.proof.has_value());
        CHECK_FALSE(oracle_contains(0, 100, 0));
    }
    SUBCASE("overlapping statement is refused") {
        RangeStatement st{{Interval{0, 60}, Interval{50, 100}}};
        CHECK_THROWS_AS(respond(gp, 10, st, rng), StatementInvalid);
    }
}

TEST_CASE("verify_bundle labels the matched interval True and the rest False") {
    const GroupParams& gp = params();
    Drbg rng(39);
    RangeStatement st{{Interval{100, 200}, Interval{200, 300}}};
    ProofBundle bundle = respond(gp, 150, st, rng);

    Verdict verdict = verify_bundle(gp, bundle, st);
    REQUIRE(verdict.kind == Verdict::Kind::Labels);
    CHECK(verdict.labels == std::vector<bool>{true, false});
    CHECK(verdict.true_index() == 0);
    CHECK(verdict.to_string() == "[True,False]");
}

TEST_CASE("tampered bundles are rejected, NoMatch passes through") {
    const GroupParams& gp = params();
    Drbg rng(40);
    RangeStatement st{{Interval{0, 50}, Interval{50, 100}}};

    SUBCASE("matched index pointing at a non-containing interval fails") {
        ProofBundle bundle = respond(gp, 60, st, rng);
        REQUIRE(bundle.matched_index == 1);
        bundle.matched_index = 0;  // proof was built for (50,100]
        CHECK(verify_bundle(gp, bundle, st).kind == Verdict::Kind::Rejected);
    }
    SUBCASE("mutated proof bytes fail") {
        ProofBundle bundle = respond(gp, 60, st, rng);
        Bytes wire = bundle.encode();
        wire[wire.size() / 2] ^= 0x01;
        bool rejected = false;
        try {
            rejected = verify_bundle(gp, ProofBundle::decode(wire), st).kind ==
                       Verdict::Kind::Rejected;
        } catch (const MalformedData&) {
            rejected = true;
        }
        CHECK(rejected);
    }
    SUBCASE("NoMatch bundle yields NoMatch verdict") {
        ProofBundle bundle = respond(gp, 0, st, rng);
        CHECK(verify_bundle(gp, bundle, st).kind == Verdict::Kind::NoMatch);
    }
    SUBCASE("out-of-range matched index is rejected") {
        ProofBundle bundle = respond(gp, 60, st, rng);
        bundle.matched_index = 5;
        CHECK(verify_bundle(gp, bundle, st).kind == Verdict::Kind::Rejected);
    }
}

TEST_CASE("completeness over random values and intervals") {
    const GroupParams& gp = params();
    Drbg rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        Amount lo = rng.next_u64() % 100000;
        Amount width = 1 + rng.next_u64() % 65536;  // hi - lo <= 2^16
        Amount hi = lo + width;
        Amount v = lo + 1 + rng.next_u64() % width;
        REQUIRE(oracle_contains(lo, hi, v));

        RangeStatement st{{Interval{lo, hi}}};
        Verdict verdict = verify_bundle(gp, respond(gp, v, st, rng), st);
        REQUIRE(verdict.kind == Verdict::Kind::Labels);
        CHECK(verdict.true_index() == 0);
    }
}

TEST_CASE("a True label never verifies against the other intervals") {
    const GroupParams& gp = params();
    Drbg rng(42);
    RangeStatement st{{Interval{0, 64}, Interval{64, 128}, Interval{128, 192}}};
    ProofBundle bundle = respond(gp, 100, st, rng);
    REQUIRE(bundle.matched_index == 1);
    REQUIRE(verify_bundle(gp, bundle, st).true_index() == 1);
    for (std::size_t j = 0; j < st.intervals.size(); ++j) {
        if (j == 1) continue;
        CHECK_FALSE(verify_membership(gp, bundle.commitment, st.intervals[j], *bundle.proof));
    }
}

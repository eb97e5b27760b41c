#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "veilsum/envelope.hpp"
#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"

using namespace veilsum;
using namespace veilsum::envelope;

static EntityKeys test_keys(std::uint64_t seed) {
    Drbg rng(seed);
    return keygen(KeyProfile::test, rng);
}

TEST_CASE("keygen is deterministic given the seed") {
    EntityKeys a = test_keys(1), b = test_keys(1);
    CHECK(a.enc_public.encode() == b.enc_public.encode());
    CHECK(a.sig_public.encode() == b.sig_public.encode());
    CHECK(a.enc_private.d == b.enc_private.d);
    CHECK(a.sig_private.d == b.sig_private.d);
}

TEST_CASE("distinct seeds give distinct addresses") {
    std::set<std::string> addrs;
    for (std::uint64_t s = 0; s < 100; ++s) addrs.insert(address_of(test_keys(s).sig_public).hex());
    CHECK(addrs.size() == 100);
}

TEST_CASE("seal/open roundtrip across payload sizes") {
    EntityKeys keys = test_keys(2);
    Drbg rng(3);
    for (std::size_t len : {std::size_t{0}, std::size_t{1}, std::size_t{1024}, std::size_t{1 << 20}}) {
        Bytes payload = rng.bytes(len);
        SealedEnvelope env = seal(keys.enc_public, payload, rng);
        CHECK(open(keys.enc_private, env) == payload);
    }
}

TEST_CASE("sealing is randomized") {
    EntityKeys keys = test_keys(4);
    Drbg rng(5);
    Bytes payload = to_bytes("fixed payload");
    std::set<std::string> seen;
    for (int i = 0; i < 100; ++i) seen.insert(hex_encode(seal(keys.enc_public, payload, rng).encode()));
    CHECK(seen.size() == 100);
}

TEST_CASE("opening with a foreign key reports WrongRecipient") {
    EntityKeys alice = test_keys(6), bob = test_keys(7);
    Drbg rng(8);
    SealedEnvelope env = seal(alice.enc_public, to_bytes("secret"), rng);
    CHECK_THROWS_AS(open(bob.enc_private, env), WrongRecipient);
}

TEST_CASE("tampered body reports CorruptEnvelope") {
    EntityKeys keys = test_keys(9);
    Drbg rng(10);
    SealedEnvelope env = seal(keys.enc_public, to_bytes("payload bytes"), rng);
    for (std::size_t i = 0; i < env.body.size(); i += 5) {
        SealedEnvelope bad = env;
        bad.body[i] ^= 0x01;
        CHECK_THROWS_AS(open(keys.enc_private, bad), CorruptEnvelope);
    }
    SUBCASE("tampered encapsulated key also fails authentication") {
        SealedEnvelope bad = env;
        bad.encapsulated_key[0] ^= 0x01;
        CHECK_THROWS_AS(open(keys.enc_private, bad), CorruptEnvelope);
    }
}

TEST_CASE("a reused envelope stays openable and byte-identical") {
    EntityKeys keys = test_keys(11);
    Drbg rng(12);
    SealedEnvelope env = seal(keys.enc_public, to_bytes("token"), rng);
    Bytes wire = env.encode();
    for (int i = 0; i < 3; ++i) {
        SealedEnvelope again = SealedEnvelope::decode(wire);
        CHECK(again.encode() == wire);
        CHECK(open(keys.enc_private, again) == to_bytes("token"));
    }
}

TEST_CASE("sign/verify roundtrip and bit-flip rejection") {
    EntityKeys keys = test_keys(13);
    Drbg rng(14);
    Bytes msg = to_bytes("hello");
    Signature sig = sign(keys.sig_private, msg, rng);
    CHECK(verify(keys.sig_public, msg, sig));

    Bytes flipped = msg;
    flipped[0] ^= 0x01;
    CHECK_FALSE(verify(keys.sig_public, flipped, sig));

    Signature bad = sig;
    bad.bytes[bad.bytes.size() / 2] ^= 0x01;
    CHECK_FALSE(verify(keys.sig_public, msg, bad));
}

TEST_CASE("verification under a foreign key fails") {
    EntityKeys alice = test_keys(15), bob = test_keys(16);
    Drbg rng(17);
    Bytes msg = to_bytes("message");
    Signature sig = sign(alice.sig_private, msg, rng);
    CHECK_FALSE(verify(bob.sig_public, msg, sig));
}

TEST_CASE("random signature bytes never verify") {
    EntityKeys keys = test_keys(18);
    Drbg rng(19);
    Bytes msg = to_bytes("fixed message");
    for (int i = 0; i < 1000; ++i) {
        Signature junk{rng.bytes(1 + (i % 96))};
        CHECK_FALSE(verify(keys.sig_public, msg, junk));
    }
}

TEST_CASE("signatures are randomized but all verify") {
    EntityKeys keys = test_keys(20);
    Drbg rng(21);
    Bytes msg = to_bytes("same message");
    std::set<std::string> seen;
    for (int i = 0; i < 20; ++i) {
        Signature sig = sign(keys.sig_private, msg, rng);
        CHECK(verify(keys.sig_public, msg, sig));
        seen.insert(hex_encode(sig.bytes));
    }
    CHECK(seen.size() == 20);
}

TEST_CASE("address is a deterministic 20-byte digest of the signature key") {
    EntityKeys keys = test_keys(22);
    Address a1 = address_of(keys.sig_public);
    Address a2 = address_of(keys.sig_public);
    CHECK(a1 == a2);
    CHECK(a1.bytes.size() == 20);
}

TEST_CASE("address collision sweep over a thousand keys") {
    // Address derivation is a pure function of the encoded key, so the sweep
    // can use synthetic moduli instead of running a thousand keygens.
    Drbg rng(23);
    std::set<std::string> addrs;
    for (int i = 0; i < 1000; ++i) {
        RsaPublic pk;
        pk.n = rng.mpz_bits(512);
        pk.e = 65537;
        pk.fingerprint = fingerprint16("veilsum/rsa-pk/v1", pk.encode());
        addrs.insert(address_of(pk).hex());
    }
    CHECK(addrs.size() == 1000);
}

TEST_CASE("public key encoding roundtrips") {
    EntityKeys keys = test_keys(24);
    RsaPublic back = RsaPublic::decode(keys.enc_public.encode());
    CHECK(back.n == keys.enc_public.n);
    CHECK(back.e == keys.enc_public.e);
    CHECK(back.fingerprint == keys.enc_public.fingerprint);
}

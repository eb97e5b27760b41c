#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"
#include "veilsum/paillier.hpp"

using namespace veilsum;
using namespace veilsum::he;

// Independent small-modulus oracle: textbook modular arithmetic on plain
// 64-bit integers, sharing no code with the library path it checks.
namespace oracle {

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
    unsigned __int128 acc = 1;
    unsigned __int128 b = base % mod;
    while (exp > 0) {
        if (exp & 1) acc = acc * b % mod;
        b = b * b % mod;
        exp >>= 1;
    }
    return static_cast<std::uint64_t>(acc);
}

// Paillier over n=35 from first principles: c = 36^m * r^35 mod 1225.
std::uint64_t encrypt35(std::uint64_t m, std::uint64_t r) {
    return powmod(36, m, 1225) * powmod(r, 35, 1225) % 1225;
}

std::uint64_t decrypt35(std::uint64_t c) {
    // lambda = lcm(4,6) = 12; L(u) = (u-1)/35; mu = L(36^12 mod 1225)^-1 mod 35.
    std::uint64_t l_g = (powmod(36, 12, 1225) - 1) / 35;
    std::uint64_t mu = 0;
    for (std::uint64_t cand = 1; cand < 35; ++cand)
        if (l_g * cand % 35 == 1) mu = cand;
    std::uint64_t l_c = (powmod(c, 12, 1225) - 1) / 35;
    return l_c * mu % 35;
}

}  // namespace oracle

TEST_CASE("toy keypair from primes 5 and 7") {
    auto [pk, sk] = keypair_from_primes(5, 7);
    CHECK(pk.n == 35);
    CHECK(sk.lambda == 12);  // lcm(4, 6)
    CHECK(pk.bit_length == 6);
    CHECK_FALSE(pk.production);
    // mu * L(g^lambda mod n^2) = 1 mod n
    mpz_class u = powm(mpz_class(36), sk.lambda, mpz_class(1225));
    mpz_class l = (u - 1) / 35;
    CHECK(l * sk.mu % 35 == 1);
}

TEST_CASE("keygen is deterministic given the seed") {
    Drbg rng_a(7), rng_b(7);
    auto [pk_a, sk_a] = keygen(64, rng_a);
    auto [pk_b, sk_b] = keygen(64, rng_b);
    CHECK(pk_a.n == pk_b.n);
    CHECK(sk_a.lambda == sk_b.lambda);
    CHECK(sk_a.mu == sk_b.mu);
    CHECK(pk_a.fingerprint == pk_b.fingerprint);
}

TEST_CASE("keygen rejects odd or too-small bit lengths") {
    Drbg rng(1);
    CHECK_THROWS_AS(keygen(15, rng), Error);
    CHECK_THROWS_AS(keygen(8, rng), Error);
    CHECK_THROWS_AS(keygen(33, rng), Error);
}

TEST_CASE("keygen produces distinct primes of half the bit length") {
    Drbg rng(99);
    auto [pk, sk] = keygen(128, rng);
    CHECK(pk.bit_length >= 127);
    CHECK(pk.bit_length <= 128);
    CHECK_FALSE(is_probable_prime(pk.n));
}

TEST_CASE("encrypting zero with unit blinding gives the unit ciphertext") {
    auto [pk, sk] = keypair_from_primes(5, 7);
    Ciphertext c = encrypt_with_blinding(pk, 0, 1);
    CHECK(c.value == 1);
    CHECK(decrypt(sk, c) == 0);
}

TEST_CASE("small-modulus encryption agrees with the arithmetic oracle") {
    auto [pk, sk] = keypair_from_primes(5, 7);
    // Fixed blinding so both paths compute the same ciphertext.
    for (std::uint64_t m : {0ull, 1ull, 12ull, 34ull}) {
        Ciphertext c = encrypt_with_blinding(pk, mpz_class(static_cast<unsigned long>(m)), 2);
        CHECK(c.value == oracle::encrypt35(m, 2));
        CHECK(oracle::decrypt35(static_cast<std::uint64_t>(c.value.get_ui())) == m);
        CHECK(decrypt(sk, c) == m);
    }
}

TEST_CASE("randomized encryptions of the same plaintext never collide") {
    Drbg keyrng(5);
    auto [pk, sk] = keygen(64, keyrng);
    Drbg rng(6);
    std::set<std::string> seen;
    for (int i = 0; i < 100; ++i) {
        Ciphertext c = encrypt(pk, Amount{5}, rng);
        seen.insert(hex_encode(c.encode()));
        CHECK(decrypt_amount(sk, c) == 5);
    }
    CHECK(seen.size() == 100);
}

TEST_CASE("encrypt rejects out-of-range plaintexts") {
    auto [pk, sk] = keypair_from_primes(5, 7);
    Drbg rng(1);
    CHECK_THROWS_AS(encrypt(pk, mpz_class(35), rng), Error);
    CHECK_THROWS_AS(encrypt(pk, mpz_class(-1), rng), Error);
}

TEST_CASE("unit ciphertext decrypts to zero under any key") {
    Drbg rng(11);
    auto [pk, sk] = keygen(64, rng);
    Ciphertext one{1, pk.fingerprint};
    CHECK(decrypt(sk, one) == 0);
}

TEST_CASE("roundtrip at the plaintext boundaries") {
    Drbg keyrng(12);
    auto [pk, sk] = keygen(64, keyrng);
    Drbg rng(13);
    for (const mpz_class& m : {mpz_class(0), mpz_class(1), mpz_class(pk.n - 1)})
        CHECK(decrypt(sk, encrypt(pk, m, rng)) == m);
}

TEST_CASE("homomorphic addition wraps modulo n") {
    auto [pk, sk] = keypair_from_primes(5, 7);
    Drbg rng(14);
    Ciphertext a = encrypt(pk, mpz_class(34), rng);
    Ciphertext b = encrypt(pk, mpz_class(2), rng);
    CHECK(decrypt(sk, add(pk, a, b)) == (34 + 2) % 35);
}

TEST_CASE("sum of two ciphertexts decrypts to the plaintext sum") {
    Drbg keyrng(15);
    auto [pk, sk] = keygen(64, keyrng);
    Drbg rng(16);
    CHECK(decrypt_amount(sk, add(pk, encrypt(pk, Amount{3}, rng), encrypt(pk, Amount{5}, rng))) == 8);
    // Additive identity.
    Ciphertext m = encrypt(pk, Amount{29}, rng);
    CHECK(decrypt_amount(sk, add(pk, m, encrypt(pk, Amount{0}, rng))) == 29);
}

TEST_CASE("homomorphism property over random pairs") {
    Drbg keyrng(17);
    auto [pk, sk] = keygen(256, keyrng);
    Drbg rng(18);
    for (int i = 0; i < 50; ++i) {
        mpz_class a = rng.mpz_below(pk.n);
        mpz_class b = rng.mpz_below(pk.n);
        mpz_class expected = (a + b) % pk.n;  // plaintext-addition oracle
        CHECK(decrypt(sk, add(pk, encrypt(pk, a, rng), encrypt(pk, b, rng))) == expected);
    }
}

TEST_CASE("add_many folds a ciphertext list") {
    Drbg keyrng(19);
    auto [pk, sk] = keygen(64, keyrng);
    Drbg rng(20);

    SUBCASE("single element is returned unchanged") {
        Ciphertext c = encrypt(pk, Amount{42}, rng);
        std::vector<Ciphertext> cs{c};
        CHECK(add_many(pk, cs).value == c.value);
    }
    SUBCASE("three uploads sum to sixty") {
        std::vector<Ciphertext> cs{encrypt(pk, Amount{10}, rng), encrypt(pk, Amount{20}, rng),
                                   encrypt(pk, Amount{30}, rng)};
        CHECK(decrypt_amount(sk, add_many(pk, cs)) == 60);
    }
    SUBCASE("all-zero inputs sum to zero") {
        std::vector<Ciphertext> cs;
        for (int i = 0; i < 8; ++i) cs.push_back(encrypt(pk, Amount{0}, rng));
        CHECK(decrypt_amount(sk, add_many(pk, cs)) == 0);
    }
    SUBCASE("empty list is rejected") {
        std::vector<Ciphertext> cs;
        CHECK_THROWS_AS(add_many(pk, cs), Error);
    }
}

TEST_CASE("cross-key operations are detected by fingerprint") {
    Drbg rng_a(21), rng_b(22), rng(23);
    auto [pk_a, sk_a] = keygen(64, rng_a);
    auto [pk_b, sk_b] = keygen(64, rng_b);
    Ciphertext under_a = encrypt(pk_a, Amount{7}, rng);
    Ciphertext under_b = encrypt(pk_b, Amount{9}, rng);
    CHECK_THROWS_AS(add(pk_a, under_a, under_b), FingerprintMismatch);
    CHECK_THROWS_AS(decrypt(sk_b, under_a), FingerprintMismatch);
}

TEST_CASE("ciphertext encoding roundtrips") {
    Drbg keyrng(24);
    auto [pk, sk] = keygen(64, keyrng);
    Drbg rng(25);
    Ciphertext c = encrypt(pk, Amount{123}, rng);
    Ciphertext back = Ciphertext::decode(c.encode());
    CHECK(back.value == c.value);
    CHECK(back.key_fingerprint == c.key_fingerprint);
    CHECK(decrypt_amount(sk, back) == 123);
}

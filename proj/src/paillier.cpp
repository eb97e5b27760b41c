#include "veilsum/paillier.hpp"

#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"

namespace veilsum::he {

static constexpr std::string_view kPkTag = "veilsum/he-pk/v1";
static constexpr std::string_view kCtTag = "veilsum/he-ct/v1";

Bytes PublicKey::encode() const {
    ByteWriter w;
    w.put_str(kPkTag);
    put_mpz(w, n);
    return w.take();
}

PublicKey PublicKey::from_modulus(const mpz_class& n) {
    PublicKey pk;
    pk.n = n;
    pk.bit_length = static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2));
    pk.production = pk.bit_length >= kProductionBits;
    pk.fingerprint = fingerprint16(kPkTag, [&] {
        ByteWriter w;
        w.put_str(kPkTag);
        put_mpz(w, n);
        return w.take();
    }());
    return pk;
}

PublicKey PublicKey::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.get_str() != kPkTag) throw MalformedData("not a homomorphic public key encoding");
    mpz_class n = get_mpz(r);
    r.require_end();
    if (n <= 1) throw MalformedData("bad modulus");
    return from_modulus(n);
}

Bytes Ciphertext::encode() const {
    ByteWriter w;
    w.put_str(kCtTag);
    w.put_raw(key_fingerprint);
    put_mpz(w, value);
    return w.take();
}

Ciphertext Ciphertext::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.get_str() != kCtTag) throw MalformedData("not a ciphertext encoding");
    Ciphertext c;
    c.key_fingerprint = r.get_array<16>();
    c.value = get_mpz(r);
    r.require_end();
    return c;
}

std::pair<PublicKey, PrivateKey> keypair_from_primes(const mpz_class& p, const mpz_class& q) {
    if (p == q) throw Error("keygen: primes must be distinct");
    mpz_class n = p * q;
    mpz_class nsq = n * n;

    mpz_class lambda;
    mpz_class pm1 = p - 1, qm1 = q - 1;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());

    // g = n+1, so L(g^lambda mod n^2) = lambda mod n and mu = lambda^-1 mod n.
    mpz_class g_lambda = powm(n + 1, lambda, nsq);
    mpz_class l_value = (g_lambda - 1) / n;
    mpz_class mu = invmod(l_value % n, n);

    PublicKey pk = PublicKey::from_modulus(n);
    PrivateKey sk{lambda, mu, n};
    return {pk, sk};
}

std::pair<PublicKey, PrivateKey> keygen(unsigned bit_length, Drbg& rng) {
    if (bit_length < 16) throw Error("keygen: bit_length too small (minimum 16)");
    if (bit_length % 2 != 0) throw Error("keygen: bit_length must be even");

    unsigned half = bit_length / 2;
    mpz_class p = gen_prime(half, rng);
    mpz_class q;
    do {
        q = gen_prime(half, rng);
    } while (q == p);
    return keypair_from_primes(p, q);
}

static void check_fingerprint(const Digest16& got, const Digest16& expected) {
    if (got != expected) throw FingerprintMismatch("ciphertext/key fingerprint mismatch");
}

Ciphertext encrypt_with_blinding(const PublicKey& pk, const mpz_class& m, const mpz_class& r) {
    if (m < 0 || m >= pk.n) throw Error("encrypt: plaintext out of range [0, n)");
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    if (r <= 0 || r >= pk.n || g != 1) throw Error("encrypt: blinding not a unit mod n");

    mpz_class nsq = pk.n_squared();
    // (1+n)^m mod n^2 == 1 + m*n mod n^2, no exponentiation needed.
    mpz_class gm = (1 + m * pk.n) % nsq;
    mpz_class rn = powm(r, pk.n, nsq);
    return Ciphertext{gm * rn % nsq, pk.fingerprint};
}

static mpz_class random_unit(const PublicKey& pk, Drbg& rng) {
    for (;;) {
        mpz_class r = rng.mpz_below(pk.n);
        if (r == 0) continue;
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
        if (g == 1) return r;
    }
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, Drbg& rng) {
    return encrypt_with_blinding(pk, m, random_unit(pk, rng));
}

Ciphertext encrypt(const PublicKey& pk, Amount m, Drbg& rng) {
    return encrypt(pk, mpz_class(static_cast<unsigned long>(m)), rng);
}

mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c) {
    check_fingerprint(c.key_fingerprint, PublicKey::from_modulus(sk.n).fingerprint);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), c.value.get_mpz_t(), sk.n.get_mpz_t());
    if (c.value <= 0 || g != 1) throw Error("decrypt: ciphertext not a unit mod n^2");

    mpz_class nsq = sk.n * sk.n;
    mpz_class u = powm(c.value, sk.lambda, nsq);
    mpz_class l_value = (u - 1) / sk.n;
    return l_value * sk.mu % sk.n;
}

Amount decrypt_amount(const PrivateKey& sk, const Ciphertext& c) {
    mpz_class m = decrypt(sk, c);
    if (m != 0 && mpz_sizeinbase(m.get_mpz_t(), 2) > 64)
        throw Error("decrypt: plaintext exceeds amount range");
    Bytes b = mpz_to_bytes(m);
    Amount out = 0;
    for (std::uint8_t byte : b) out = (out << 8) | byte;
    return out;
}

Ciphertext add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
    check_fingerprint(c1.key_fingerprint, pk.fingerprint);
    check_fingerprint(c2.key_fingerprint, pk.fingerprint);
    return Ciphertext{c1.value * c2.value % pk.n_squared(), pk.fingerprint};
}

Ciphertext add_many(const PublicKey& pk, std::span<const Ciphertext> cs) {
    if (cs.empty()) throw Error("add_many: empty ciphertext list");
    Ciphertext acc = cs[0];
    check_fingerprint(acc.key_fingerprint, pk.fingerprint);
    for (std::size_t i = 1; i < cs.size(); ++i) acc = add(pk, acc, cs[i]);
    return acc;
}

}  // namespace veilsum::he

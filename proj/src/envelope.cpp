#include "veilsum/envelope.hpp"

#include <openssl/evp.h>

#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"

namespace veilsum::envelope {

static constexpr std::string_view kPkTag = "veilsum/rsa-pk/v1";
static constexpr std::string_view kKemTag = "veilsum/kem/v1";
static constexpr std::string_view kSigTag = "veilsum/sig/v1";
static constexpr std::string_view kEnvTag = "veilsum/env/v1";
static constexpr std::size_t kNonceLen = 12;
static constexpr std::size_t kGcmTagLen = 16;
static constexpr std::size_t kSaltLen = 16;

Bytes RsaPublic::encode() const {
    ByteWriter w;
    w.put_str(kPkTag);
    put_mpz(w, n);
    put_mpz(w, e);
    return w.take();
}

RsaPublic RsaPublic::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.get_str() != kPkTag) throw MalformedData("not an asymmetric public key encoding");
    RsaPublic pk;
    pk.n = get_mpz(r);
    pk.e = get_mpz(r);
    r.require_end();
    pk.fingerprint = fingerprint16(kPkTag, pk.encode());
    return pk;
}

static RsaPublic make_public(const mpz_class& n, const mpz_class& e) {
    RsaPublic pk;
    pk.n = n;
    pk.e = e;
    pk.fingerprint = fingerprint16(kPkTag, pk.encode());
    return pk;
}

static std::pair<RsaPublic, RsaPrivate> rsa_keygen(unsigned bits, Drbg& rng) {
    const mpz_class e = 65537;
    for (;;) {
        mpz_class p = gen_prime(bits / 2, rng);
        mpz_class q;
        do {
            q = gen_prime(bits / 2, rng);
        } while (q == p);

        mpz_class pm1 = p - 1, qm1 = q - 1;
        mpz_class lambda;
        mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), e.get_mpz_t(), lambda.get_mpz_t());
        if (g != 1) continue;

        mpz_class n = p * q;
        mpz_class d = invmod(e, lambda);
        RsaPublic pk = make_public(n, e);
        RsaPrivate sk{n, d, pk.fingerprint};
        return {pk, sk};
    }
}

EntityKeys keygen(KeyProfile profile, Drbg& rng) {
    unsigned bits = profile == KeyProfile::full ? 2048 : 512;
    Drbg enc_rng = rng.child("enc-keypair");
    Drbg sig_rng = rng.child("sig-keypair");
    auto [enc_pk, enc_sk] = rsa_keygen(bits, enc_rng);
    auto [sig_pk, sig_sk] = rsa_keygen(bits, sig_rng);
    return EntityKeys{enc_pk, enc_sk, sig_pk, sig_sk};
}

Bytes SealedEnvelope::encode() const {
    ByteWriter w;
    w.put_str(kEnvTag);
    w.put_raw(recipient_fingerprint);
    w.put_blob(encapsulated_key);
    w.put_blob(nonce);
    w.put_blob(body);
    return w.take();
}

SealedEnvelope SealedEnvelope::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    if (r.get_str() != kEnvTag) throw MalformedData("not a sealed envelope encoding");
    SealedEnvelope env;
    env.recipient_fingerprint = r.get_array<16>();
    env.encapsulated_key = r.get_blob();
    env.nonce = r.get_blob();
    env.body = r.get_blob();
    r.require_end();
    return env;
}

static Digest32 kem_key(const mpz_class& shared) {
    Sha256 h;
    h.update(kKemTag).update(mpz_to_bytes(shared));
    return h.finish();
}

static Bytes gcm_encrypt(const Digest32& key, std::span<const std::uint8_t> nonce,
                         std::span<const std::uint8_t> plaintext) {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (ctx == nullptr) throw Error("cipher context allocation failed");
    Bytes out(plaintext.size() + kGcmTagLen);
    int len = 0;
    int ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) &&
             EVP_EncryptUpdate(ctx, out.data(), &len, plaintext.data(),
                               static_cast<int>(plaintext.size()));
    int total = len;
    ok = ok && EVP_EncryptFinal_ex(ctx, out.data() + total, &len);
    total += len;
    ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kGcmTagLen,
                                   out.data() + plaintext.size());
    EVP_CIPHER_CTX_free(ctx);
    if (!ok || total != static_cast<int>(plaintext.size())) throw Error("seal: encryption failed");
    return out;
}

static Bytes gcm_decrypt(const Digest32& key, std::span<const std::uint8_t> nonce,
                         std::span<const std::uint8_t> body) {
    if (body.size() < kGcmTagLen) throw CorruptEnvelope("envelope body too short");
    std::size_t ct_len = body.size() - kGcmTagLen;
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (ctx == nullptr) throw Error("cipher context allocation failed");
    Bytes out(ct_len);
    int len = 0;
    int ok = EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) &&
             EVP_DecryptUpdate(ctx, out.data(), &len, body.data(), static_cast<int>(ct_len));
    int total = len;
    ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kGcmTagLen,
                                   const_cast<std::uint8_t*>(body.data() + ct_len));
    ok = ok && EVP_DecryptFinal_ex(ctx, out.data() + total, &len);
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) throw CorruptEnvelope("envelope body failed authentication");
    return out;
}

SealedEnvelope seal(const RsaPublic& recipient, std::span<const std::uint8_t> payload, Drbg& rng) {
    // RSA-KEM: a random x below n is encapsulated as x^e; the symmetric key
    // is derived from x by hashing.
    mpz_class x = rng.mpz_below(recipient.n);
    mpz_class c = powm(x, recipient.e, recipient.n);

    SealedEnvelope env;
    env.recipient_fingerprint = recipient.fingerprint;
    env.encapsulated_key = mpz_to_bytes(c);
    env.nonce = rng.bytes(kNonceLen);
    env.body = gcm_encrypt(kem_key(x), env.nonce, payload);
    return env;
}

Bytes open(const RsaPrivate& sk, const SealedEnvelope& env) {
    if (env.recipient_fingerprint != sk.fingerprint)
        throw WrongRecipient("envelope sealed for a different recipient");
    if (env.nonce.size() != kNonceLen) throw CorruptEnvelope("bad nonce length");
    mpz_class c = mpz_from_bytes(env.encapsulated_key);
    if (c >= sk.n) throw CorruptEnvelope("encapsulated key out of range");
    mpz_class x = powm(c, sk.d, sk.n);
    return gcm_decrypt(kem_key(x), env.nonce, env.body);
}

// Full-domain hash of (salt, message), expanded to one byte less than the
// modulus so the value is always below n.
static mpz_class sig_digest(const mpz_class& n, std::span<const std::uint8_t> salt,
                            std::span<const std::uint8_t> message) {
    std::size_t n_len = mpz_to_bytes(n).size();
    ByteWriter w;
    w.put_blob(salt);
    w.put_blob(message);
    Bytes expanded = hash_expand(kSigTag, w.bytes(), n_len > 1 ? n_len - 1 : 1);
    return mpz_from_bytes(expanded);
}

Signature sign(const RsaPrivate& sk, std::span<const std::uint8_t> message, Drbg& rng) {
    Bytes salt = rng.bytes(kSaltLen);
    mpz_class t = sig_digest(sk.n, salt, message);
    mpz_class s = powm(t, sk.d, sk.n);
    ByteWriter w;
    w.put_blob(salt);
    put_mpz(w, s);
    return Signature{w.take()};
}

bool verify(const RsaPublic& pk, std::span<const std::uint8_t> message, const Signature& sig) {
    try {
        ByteReader r(sig.bytes);
        Bytes salt = r.get_blob();
        mpz_class s = get_mpz(r);
        r.require_end();
        if (salt.size() != kSaltLen || s >= pk.n) return false;
        return powm(s, pk.e, pk.n) == sig_digest(pk.n, salt, message);
    } catch (const MalformedData&) {
        return false;
    }
}

Address address_of(const RsaPublic& sig_public) {
    Digest32 full = sha256(sig_public.encode());
    Address a;
    std::copy(full.begin(), full.begin() + a.bytes.size(), a.bytes.begin());
    return a;
}

}  // namespace veilsum::envelope

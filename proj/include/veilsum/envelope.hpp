#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "veilsum/bytes.hpp"
#include "veilsum/drbg.hpp"
#include "veilsum/hash.hpp"

namespace veilsum::envelope {

// Confidentiality and authentication layer: hybrid public-key sealing
// (RSA key encapsulation + AES-256-GCM body) and randomized full-domain-hash
// RSA signatures. Each entity carries one encryption keypair and one
// signature keypair.

enum class KeyProfile { test, full };  // 512-bit / 2048-bit moduli

struct RsaPublic {
    mpz_class n;
    mpz_class e;
    Digest16 fingerprint;

    Bytes encode() const;
    static RsaPublic decode(std::span<const std::uint8_t> data);
};

struct RsaPrivate {
    mpz_class n;
    mpz_class d;
    Digest16 fingerprint;  // of the matching public key
};

struct EntityKeys {
    RsaPublic enc_public;
    RsaPrivate enc_private;
    RsaPublic sig_public;
    RsaPrivate sig_private;
};

// 20-byte identifier: truncated SHA-256 of the canonical sig_public encoding.
struct Address {
    std::array<std::uint8_t, 20> bytes{};

    auto operator<=>(const Address&) const = default;
    std::string hex() const { return hex_encode(bytes); }
};

struct SealedEnvelope {
    Bytes encapsulated_key;  // RSA encapsulation of a fresh symmetric key
    Bytes nonce;             // 12 bytes
    Bytes body;              // AES-256-GCM ciphertext || 16-byte tag
    Digest16 recipient_fingerprint;

    Bytes encode() const;
    static SealedEnvelope decode(std::span<const std::uint8_t> data);
};

struct Signature {
    Bytes bytes;  // salt || RSA value, length-prefixed
};

EntityKeys keygen(KeyProfile profile, Drbg& rng);

// Randomized; payload may be any length including empty.
SealedEnvelope seal(const RsaPublic& recipient, std::span<const std::uint8_t> payload, Drbg& rng);

// Throws WrongRecipient on a fingerprint mismatch, CorruptEnvelope when the
// body fails authentication.
Bytes open(const RsaPrivate& sk, const SealedEnvelope& env);

Signature sign(const RsaPrivate& sk, std::span<const std::uint8_t> message, Drbg& rng);
// Never throws: malformed signature bytes verify as false.
bool verify(const RsaPublic& pk, std::span<const std::uint8_t> message, const Signature& sig);

Address address_of(const RsaPublic& sig_public);

}  // namespace veilsum::envelope

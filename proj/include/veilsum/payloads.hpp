#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "veilsum/bytes.hpp"
#include "veilsum/hash.hpp"
#include "veilsum/ledger.hpp"
#include "veilsum/rangeproof.hpp"

namespace veilsum::payloads {

// Canonical binary bodies for each ledger record kind. Session and request
// identifiers live in the record header, not in the payload.

using AddressBytes = std::array<std::uint8_t, 20>;

// Opens an upload session: the user's sealed address token plus the sources
// expected to upload, with the account each one should look up.
struct Manifest {
    Bytes caddr_token;  // encoded SealedEnvelope under the operator's key
    std::vector<std::pair<std::string, std::string>> expected;  // (source_id, account_id)

    Bytes encode() const;
    static Manifest decode(std::span<const std::uint8_t> data);
};

struct Challenge {
    std::string source_id;
    Bytes sealed_nonce;    // envelope to the registered account owner
    Digest32 nonce_hash;   // public commitment binding responses to this challenge

    Bytes encode() const;
    static Challenge decode(std::span<const std::uint8_t> data);
};

struct Response {
    std::string source_id;
    Bytes nonce;      // revealed preimage; proves the envelope was opened
    Bytes signature;  // over (nonce, session, source) under the owner key

    Bytes encode() const;
    static Response decode(std::span<const std::uint8_t> data);
};

struct Upload {
    std::string source_id;
    Bytes caddr_token;
    Bytes sealed_ciphertext;  // envelope to the relayer holding the asset ciphertext

    Bytes encode() const;
    static Upload decode(std::span<const std::uint8_t> data);
};

struct Aggregate {
    Bytes caddr_token;
    Bytes ciphertext;  // encoded he::Ciphertext of the blind sum

    Bytes encode() const;
    static Aggregate decode(std::span<const std::uint8_t> data);
};

struct Abort {
    std::string reason;

    Bytes encode() const;
    static Abort decode(std::span<const std::uint8_t> data);
};

struct Request {
    Bytes caddr_token;
    AddressBytes requester_address{};
    zkp::RangeStatement statement;

    Bytes encode() const;
    static Request decode(std::span<const std::uint8_t> data);
};

struct ProofReply {
    Bytes caddr_token;
    std::optional<Bytes> bundle;  // absent: no aggregate known for the token

    Bytes encode() const;
    static ProofReply decode(std::span<const std::uint8_t> data);
};

enum class DenialReason : std::uint8_t { AddressMismatch, ProofInvalid, NoMatch, Timeout };

std::string denial_name(DenialReason reason);

struct Outcome {
    std::optional<std::uint32_t> tier;           // granted tier index
    std::optional<DenialReason> denied;          // exactly one of the two is set

    bool granted() const { return tier.has_value(); }
    std::string to_string() const;
    bool operator==(const Outcome&) const = default;
};

struct Decision {
    AddressBytes address{};
    Outcome outcome;

    Bytes encode() const;
    static Decision decode(std::span<const std::uint8_t> data);
};

// Message covered by the challenge-response signature.
Bytes auth_message(const ledger::SessionId& session, std::string_view source_id,
                   std::span<const std::uint8_t> nonce);

// True when the payload decodes under the record kind.
bool well_formed(ledger::RecordKind kind, std::span<const std::uint8_t> payload);

}  // namespace veilsum::payloads

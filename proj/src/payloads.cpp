#include "veilsum/payloads.hpp"

#include "veilsum/errors.hpp"

namespace veilsum::payloads {

Bytes Manifest::encode() const {
    ByteWriter w;
    w.put_blob(caddr_token);
    w.put_u32(static_cast<std::uint32_t>(expected.size()));
    for (const auto& [source, account] : expected) {
        w.put_str(source);
        w.put_str(account);
    }
    return w.take();
}

Manifest Manifest::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Manifest m;
    m.caddr_token = r.get_blob();
    std::uint32_t n = r.get_u32();
    if (n > 4096) throw MalformedData("manifest source count implausible");
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string source = r.get_str();
        std::string account = r.get_str();
        m.expected.emplace_back(std::move(source), std::move(account));
    }
    r.require_end();
    return m;
}

Bytes Challenge::encode() const {
    ByteWriter w;
    w.put_str(source_id);
    w.put_blob(sealed_nonce);
    w.put_raw(nonce_hash);
    return w.take();
}

Challenge Challenge::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Challenge c;
    c.source_id = r.get_str();
    c.sealed_nonce = r.get_blob();
    c.nonce_hash = r.get_array<32>();
    r.require_end();
    return c;
}

Bytes Response::encode() const {
    ByteWriter w;
    w.put_str(source_id);
    w.put_blob(nonce);
    w.put_blob(signature);
    return w.take();
}

Response Response::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Response resp;
    resp.source_id = r.get_str();
    resp.nonce = r.get_blob();
    resp.signature = r.get_blob();
    r.require_end();
    return resp;
}

Bytes Upload::encode() const {
    ByteWriter w;
    w.put_str(source_id);
    w.put_blob(caddr_token);
    w.put_blob(sealed_ciphertext);
    return w.take();
}

Upload Upload::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Upload u;
    u.source_id = r.get_str();
    u.caddr_token = r.get_blob();
    u.sealed_ciphertext = r.get_blob();
    r.require_end();
    return u;
}

Bytes Aggregate::encode() const {
    ByteWriter w;
    w.put_blob(caddr_token);
    w.put_blob(ciphertext);
    return w.take();
}

Aggregate Aggregate::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Aggregate a;
    a.caddr_token = r.get_blob();
    a.ciphertext = r.get_blob();
    r.require_end();
    return a;
}

Bytes Abort::encode() const {
    ByteWriter w;
    w.put_str(reason);
    return w.take();
}

Abort Abort::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Abort a;
    a.reason = r.get_str();
    r.require_end();
    return a;
}

Bytes Request::encode() const {
    ByteWriter w;
    w.put_blob(caddr_token);
    w.put_raw(requester_address);
    statement.encode_into(w);
    return w.take();
}

Request Request::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Request req;
    req.caddr_token = r.get_blob();
    req.requester_address = r.get_array<20>();
    req.statement = zkp::RangeStatement::decode_from(r);
    r.require_end();
    return req;
}

Bytes ProofReply::encode() const {
    ByteWriter w;
    w.put_blob(caddr_token);
    if (bundle.has_value()) {
        w.put_u8(1);
        w.put_blob(*bundle);
    } else {
        w.put_u8(0);
    }
    return w.take();
}

ProofReply ProofReply::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    ProofReply reply;
    reply.caddr_token = r.get_blob();
    std::uint8_t status = r.get_u8();
    if (status == 1) {
        reply.bundle = r.get_blob();
    } else if (status != 0) {
        throw MalformedData("bad proof reply status");
    }
    r.require_end();
    return reply;
}

std::string denial_name(DenialReason reason) {
    switch (reason) {
        case DenialReason::AddressMismatch:
            return "AddressMismatch";
        case DenialReason::ProofInvalid:
            return "ProofInvalid";
        case DenialReason::NoMatch:
            return "NoMatch";
        case DenialReason::Timeout:
            return "Timeout";
    }
    return "?";
}

std::string Outcome::to_string() const {
    if (tier.has_value()) return "tier:" + std::to_string(*tier);
    if (denied.has_value()) return "denied:" + denial_name(*denied);
    return "?";
}

Bytes Decision::encode() const {
    ByteWriter w;
    w.put_raw(address);
    if (outcome.tier.has_value()) {
        w.put_u8(0);
        w.put_u32(*outcome.tier);
    } else if (outcome.denied.has_value()) {
        w.put_u8(1);
        w.put_u8(static_cast<std::uint8_t>(*outcome.denied));
    } else {
        throw Error("decision outcome unset");
    }
    return w.take();
}

Decision Decision::decode(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Decision d;
    d.address = r.get_array<20>();
    std::uint8_t kind = r.get_u8();
    if (kind == 0) {
        d.outcome.tier = r.get_u32();
    } else if (kind == 1) {
        std::uint8_t reason = r.get_u8();
        if (reason > static_cast<std::uint8_t>(DenialReason::Timeout))
            throw MalformedData("bad denial reason");
        d.outcome.denied = static_cast<DenialReason>(reason);
    } else {
        throw MalformedData("bad outcome kind");
    }
    r.require_end();
    return d;
}

Bytes auth_message(const ledger::SessionId& session, std::string_view source_id,
                   std::span<const std::uint8_t> nonce) {
    ByteWriter w;
    w.put_str("veilsum/auth/v1");
    w.put_raw(session);
    w.put_str(source_id);
    w.put_blob(nonce);
    return w.take();
}

bool well_formed(ledger::RecordKind kind, std::span<const std::uint8_t> payload) {
    using ledger::RecordKind;
    try {
        switch (kind) {
            case RecordKind::SessionManifest:
                Manifest::decode(payload);
                return true;
            case RecordKind::AuthChallenge:
                Challenge::decode(payload);
                return true;
            case RecordKind::AuthResponse:
                Response::decode(payload);
                return true;
            case RecordKind::AssetUpload:
                Upload::decode(payload);
                return true;
            case RecordKind::AggregateResult:
                Aggregate::decode(payload);
                return true;
            case RecordKind::SessionAborted:
                Abort::decode(payload);
                return true;
            case RecordKind::ProofRequest:
                Request::decode(payload);
                return true;
            case RecordKind::ProofResponse:
                ProofReply::decode(payload);
                return true;
            case RecordKind::ServiceDecision:
                Decision::decode(payload);
                return true;
        }
    } catch (const MalformedData&) {
        return false;
    }
    return false;
}

}  // namespace veilsum::payloads

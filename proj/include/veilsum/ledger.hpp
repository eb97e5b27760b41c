#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "veilsum/bytes.hpp"

namespace veilsum::ledger {

// Simulated public append-only chain: a height-ordered log every protocol
// message flows through. No blocks, consensus or fees; the protocol only
// relies on the log being public, ordered and immutable.

enum class RecordKind : std::uint8_t {
    SessionManifest,
    AuthChallenge,
    AuthResponse,
    AssetUpload,
    AggregateResult,
    SessionAborted,
    ProofRequest,
    ProofResponse,
    ServiceDecision,
};

std::string kind_name(RecordKind kind);
std::optional<RecordKind> kind_from_name(std::string_view name);

using SessionId = std::array<std::uint8_t, 16>;

struct Record {
    std::uint64_t height = 0;   // assigned by the ledger, dense from 0
    RecordKind kind = RecordKind::SessionManifest;
    SessionId session_id{};     // upload session, or verification request id
    std::string author;         // role tag or pseudonymous session tag
    Bytes payload;              // kind-specific canonical encoding
    std::uint64_t logical_time = 0;

    std::string dump_line() const;  // one structured-text object, fixed key order
    static Record parse_line(std::string_view line);
};

class Ledger {
public:
    // Returns the height assigned to the record. The payload must decode
    // under its kind; malformed payloads are rejected and the ledger is
    // unchanged.
    std::uint64_t append(RecordKind kind, const SessionId& session, std::string author,
                         Bytes payload, std::uint64_t logical_time);

    std::uint64_t height() const { return records_.size(); }
    const Record& at(std::uint64_t height) const;

    // All records of the session in height order, optionally one kind only.
    std::vector<const Record*> query(const SessionId& session,
                                     std::optional<RecordKind> kind = std::nullopt) const;
    // All records with height >= from_height, in height order.
    std::vector<const Record*> poll(std::uint64_t from_height) const;

    const std::vector<Record>& records() const { return records_; }

private:
    std::vector<Record> records_;
};

}  // namespace veilsum::ledger

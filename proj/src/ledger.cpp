#include "veilsum/ledger.hpp"

#include <json.hpp>

#include "veilsum/errors.hpp"
#include "veilsum/payloads.hpp"

namespace veilsum::ledger {

using ordered_json = nlohmann::ordered_json;

std::string kind_name(RecordKind kind) {
    switch (kind) {
        case RecordKind::SessionManifest:
            return "SessionManifest";
        case RecordKind::AuthChallenge:
            return "AuthChallenge";
        case RecordKind::AuthResponse:
            return "AuthResponse";
        case RecordKind::AssetUpload:
            return "AssetUpload";
        case RecordKind::AggregateResult:
            return "AggregateResult";
        case RecordKind::SessionAborted:
            return "SessionAborted";
        case RecordKind::ProofRequest:
            return "ProofRequest";
        case RecordKind::ProofResponse:
            return "ProofResponse";
        case RecordKind::ServiceDecision:
            return "ServiceDecision";
    }
    return "?";
}

std::optional<RecordKind> kind_from_name(std::string_view name) {
    static const std::pair<std::string_view, RecordKind> table[] = {
        {"SessionManifest", RecordKind::SessionManifest},
        {"AuthChallenge", RecordKind::AuthChallenge},
        {"AuthResponse", RecordKind::AuthResponse},
        {"AssetUpload", RecordKind::AssetUpload},
        {"AggregateResult", RecordKind::AggregateResult},
        {"SessionAborted", RecordKind::SessionAborted},
        {"ProofRequest", RecordKind::ProofRequest},
        {"ProofResponse", RecordKind::ProofResponse},
        {"ServiceDecision", RecordKind::ServiceDecision},
    };
    for (const auto& [n, k] : table)
        if (n == name) return k;
    return std::nullopt;
}

std::string Record::dump_line() const {
    ordered_json j;
    j["height"] = height;
    j["kind"] = kind_name(kind);
    j["session_id"] = hex_encode(session_id);
    j["author"] = author;
    j["payload_hex"] = hex_encode(payload);
    j["logical_time"] = logical_time;
    return j.dump();
}

Record Record::parse_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("record line is not valid json: ") + e.what());
    }
    if (!j.is_object()) throw MalformedData("record line is not an object");
    try {
        Record rec;
        rec.height = j.at("height").get<std::uint64_t>();
        std::optional<RecordKind> kind = kind_from_name(j.at("kind").get<std::string>());
        if (!kind.has_value()) throw MalformedData("unknown record kind");
        rec.kind = *kind;
        Bytes session = hex_decode(j.at("session_id").get<std::string>());
        if (session.size() != rec.session_id.size()) throw MalformedData("bad session id length");
        std::copy(session.begin(), session.end(), rec.session_id.begin());
        rec.author = j.at("author").get<std::string>();
        rec.payload = hex_decode(j.at("payload_hex").get<std::string>());
        rec.logical_time = j.at("logical_time").get<std::uint64_t>();
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("record line missing field: ") + e.what());
    }
}

std::uint64_t Ledger::append(RecordKind kind, const SessionId& session, std::string author,
                             Bytes payload, std::uint64_t logical_time) {
    if (!payloads::well_formed(kind, payload))
        throw MalformedData("append rejected: payload malformed for kind " + kind_name(kind));
    Record rec;
    rec.height = records_.size();
    rec.kind = kind;
    rec.session_id = session;
    rec.author = std::move(author);
    rec.payload = std::move(payload);
    rec.logical_time = logical_time;
    records_.push_back(std::move(rec));
    return records_.back().height;
}

const Record& Ledger::at(std::uint64_t height) const {
    if (height >= records_.size()) throw Error("ledger height out of range");
    return records_[height];
}

std::vector<const Record*> Ledger::query(const SessionId& session,
                                         std::optional<RecordKind> kind) const {
    std::vector<const Record*> out;
    for (const Record& rec : records_) {
        if (rec.session_id != session) continue;
        if (kind.has_value() && rec.kind != *kind) continue;
        out.push_back(&rec);
    }
    return out;
}

std::vector<const Record*> Ledger::poll(std::uint64_t from_height) const {
    std::vector<const Record*> out;
    for (std::uint64_t h = from_height; h < records_.size(); ++h) out.push_back(&records_[h]);
    return out;
}

}  // namespace veilsum::ledger

#include "veilsum/transcript.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "veilsum/errors.hpp"

namespace veilsum::protocol {

using ordered_json = nlohmann::ordered_json;
using ledger::Record;
using ledger::RecordKind;

static std::string outcome_text(const payloads::Outcome& outcome) {
    return outcome.to_string();
}

static payloads::Outcome outcome_from_text(const std::string& text) {
    payloads::Outcome out;
    if (text.rfind("tier:", 0) == 0) {
        out.tier = static_cast<std::uint32_t>(std::stoul(text.substr(5)));
        return out;
    }
    if (text.rfind("denied:", 0) == 0) {
        std::string reason = text.substr(7);
        for (int i = 0; i <= static_cast<int>(payloads::DenialReason::Timeout); ++i) {
            auto r = static_cast<payloads::DenialReason>(i);
            if (payloads::denial_name(r) == reason) {
                out.denied = r;
                return out;
            }
        }
    }
    throw MalformedData("bad outcome text: " + text);
}

std::string Transcript::to_text() const {
    std::string out;

    ordered_json jm;
    jm["version"] = meta.version;
    jm["tool"] = meta.tool;
    jm["profile"] = profile_name(meta.profile);
    jm["seed"] = meta.seed;
    jm["group"] = meta.group_name;
    jm["instrumented"] = meta.instrumented;
    jm["production_keys"] = meta.production_keys;
    jm["operator_enc_pk"] = meta.operator_enc_pk_hex;
    jm["relayer_enc_pk"] = meta.relayer_enc_pk_hex;
    jm["zkpsp_he_pk"] = meta.zkpsp_he_pk_hex;
    ordered_json jreg = ordered_json::object();
    for (const auto& [source, accounts] : meta.registry_keys) {
        ordered_json ja = ordered_json::object();
        for (const auto& [account, info] : accounts) {
            ordered_json ji;
            ji["sig_pk"] = info.owner_sig_pk_hex;
            ji["enc_pk"] = info.owner_enc_pk_hex;
            ja[account] = ji;
        }
        jreg[source] = ja;
    }
    jm["registry_keys"] = jreg;
    ordered_json jaddr = ordered_json::object();
    for (const auto& [user, addr] : meta.user_addresses) jaddr[user] = addr;
    jm["user_addresses"] = jaddr;
    ordered_json top;
    top["meta"] = jm;
    out += top.dump();
    out += '\n';

    for (const Record& rec : records) {
        out += rec.dump_line();
        out += '\n';
    }

    ordered_json jd = ordered_json::array();
    for (const DecisionSummary& d : decisions) {
        ordered_json e;
        e["user"] = d.user;
        e["address"] = d.address_hex;
        e["request"] = d.request_hex;
        e["outcome"] = outcome_text(d.outcome);
        e["payload_hex"] = hex_encode(d.payload);
        jd.push_back(e);
    }
    ordered_json dtop;
    dtop["decisions"] = jd;
    out += dtop.dump();
    out += '\n';

    ordered_json jv = ordered_json::object();
    for (const auto& [entity, view] : views) jv[entity] = ordered_json::parse(view.to_json_text());
    ordered_json vtop;
    vtop["views"] = jv;
    out += vtop.dump();
    out += '\n';

    Digest32 digest = sha256(Bytes(out.begin(), out.end()));
    ordered_json gtop;
    gtop["digest"] = hex_encode(digest);
    out += gtop.dump();
    out += '\n';
    return out;
}

void Transcript::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << to_text();
}

static std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

Transcript Transcript::from_text(std::string_view text) {
    std::vector<std::string> lines = split_lines(text);
    if (lines.size() < 4) throw MalformedData("transcript truncated");

    Transcript t;
    std::size_t i = 0;

    ordered_json jm;
    try {
        jm = ordered_json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("bad meta line: ") + e.what());
    }
    if (!jm.contains("meta")) throw MalformedData("first line must carry run metadata");
    try {
        const ordered_json& m = jm.at("meta");
        t.meta.version = m.at("version").get<std::string>();
        t.meta.tool = m.at("tool").get<std::string>();
        t.meta.profile = profile_from_name(m.at("profile").get<std::string>());
        t.meta.seed = m.at("seed").get<std::uint64_t>();
        t.meta.group_name = m.at("group").get<std::string>();
        t.meta.instrumented = m.at("instrumented").get<bool>();
        t.meta.production_keys = m.at("production_keys").get<bool>();
        t.meta.operator_enc_pk_hex = m.at("operator_enc_pk").get<std::string>();
        t.meta.relayer_enc_pk_hex = m.at("relayer_enc_pk").get<std::string>();
        t.meta.zkpsp_he_pk_hex = m.at("zkpsp_he_pk").get<std::string>();
        for (const auto& [source, accounts] : m.at("registry_keys").items())
            for (const auto& [account, info] : accounts.items())
                t.meta.registry_keys[source][account] =
                    RegistryKeyInfo{info.at("sig_pk").get<std::string>(),
                                    info.at("enc_pk").get<std::string>()};
        for (const auto& [user, addr] : m.at("user_addresses").items())
            t.meta.user_addresses[user] = addr.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("bad meta fields: ") + e.what());
    } catch (const ValidationError& e) {
        throw MalformedData(std::string("bad meta fields: ") + e.what());
    }
    ++i;

    while (i < lines.size() && lines[i].find("\"height\"") != std::string::npos) {
        t.records.push_back(Record::parse_line(lines[i]));
        if (t.records.back().kind == RecordKind::SessionAborted) t.any_aborted = true;
        ++i;
    }

    if (i >= lines.size()) throw MalformedData("transcript missing decisions line");
    ordered_json jd;
    try {
        jd = ordered_json::parse(lines[i]);
        for (const auto& e : jd.at("decisions")) {
            DecisionSummary d;
            d.user = e.at("user").get<std::string>();
            d.address_hex = e.at("address").get<std::string>();
            d.request_hex = e.at("request").get<std::string>();
            d.outcome = outcome_from_text(e.at("outcome").get<std::string>());
            d.payload = hex_decode(e.at("payload_hex").get<std::string>());
            t.decisions.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("bad decisions line: ") + e.what());
    }
    ++i;

    if (i >= lines.size()) throw MalformedData("transcript missing views line");
    try {
        ordered_json jv = ordered_json::parse(lines[i]);
        for (const auto& [entity, body] : jv.at("views").items())
            t.views[entity] = adversary::EntityView::from_json_text(entity, body.dump());
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("bad views line: ") + e.what());
    }
    ++i;

    if (i >= lines.size()) throw MalformedData("transcript missing digest line");
    return t;
}

Transcript Transcript::from_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return from_text(buf.str());
}

std::optional<DecisionSummary> Transcript::decision_for(std::string_view user_name) const {
    for (const DecisionSummary& d : decisions)
        if (d.user == user_name) return d;
    return std::nullopt;
}

std::string VerifyIssue::to_string() const {
    if (height.has_value()) return "height " + std::to_string(*height) + ": " + message;
    return message;
}

namespace {

struct SessionCheck {
    bool has_manifest = false;
    payloads::Manifest manifest;
    std::map<std::string, payloads::Challenge> challenges;  // by source
    std::set<std::string> responded;                        // sources with verified response
    std::set<std::string> uploaded;
    bool aggregated = false;
    bool aborted = false;
};

struct RequestCheck {
    bool has_request = false;
    payloads::Request request;
    bool has_reply = false;
    payloads::ProofReply reply;
    std::optional<zkp::Verdict> verdict;
    bool decided = false;
};

}  // namespace

std::vector<VerifyIssue> verify_transcript_text(std::string_view text) {
    std::vector<VerifyIssue> issues;
    auto fail = [&issues](std::optional<std::uint64_t> height, std::string msg) {
        issues.push_back(VerifyIssue{height, std::move(msg)});
    };

    Transcript t;
    try {
        t = Transcript::from_text(text);
    } catch (const MalformedData& e) {
        fail(std::nullopt, std::string("parse error: ") + e.what());
        return issues;
    }

    envelope::RsaPublic operator_pk, relayer_pk;
    he::PublicKey he_pk;
    zkp::GroupParams group;
    try {
        operator_pk = envelope::RsaPublic::decode(hex_decode(t.meta.operator_enc_pk_hex));
        relayer_pk = envelope::RsaPublic::decode(hex_decode(t.meta.relayer_enc_pk_hex));
        he_pk = he::PublicKey::decode(hex_decode(t.meta.zkpsp_he_pk_hex));
        group = zkp::group_setup(t.meta.group_name == "modp-2048-256" ? zkp::GroupProfile::full
                                                                      : zkp::GroupProfile::test);
    } catch (const Error& e) {
        fail(std::nullopt, std::string("bad embedded keys: ") + e.what());
        return issues;
    }

    // Registered owner keys per (source, account).
    std::map<std::string, std::map<std::string, std::pair<envelope::RsaPublic, envelope::RsaPublic>>>
        owners;
    try {
        for (const auto& [source, accounts] : t.meta.registry_keys)
            for (const auto& [account, info] : accounts)
                owners[source][account] = {
                    envelope::RsaPublic::decode(hex_decode(info.owner_sig_pk_hex)),
                    envelope::RsaPublic::decode(hex_decode(info.owner_enc_pk_hex))};
    } catch (const Error& e) {
        fail(std::nullopt, std::string("bad registry keys: ") + e.what());
        return issues;
    }

    std::map<ledger::SessionId, SessionCheck> sessions;
    std::map<ledger::SessionId, RequestCheck> requests;
    std::uint64_t last_time = 0;

    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const Record& rec = t.records[i];
        const std::uint64_t h = rec.height;
        if (rec.height != i) {
            fail(h, "height not dense");
            continue;
        }
        if (rec.logical_time < last_time) fail(h, "logical time not monotone");
        last_time = rec.logical_time;
        if (!payloads::well_formed(rec.kind, rec.payload)) {
            fail(h, "payload malformed for kind " + ledger::kind_name(rec.kind));
            continue;
        }

        switch (rec.kind) {
            case RecordKind::SessionManifest: {
                SessionCheck& s = sessions[rec.session_id];
                if (s.has_manifest) {
                    fail(h, "duplicate session manifest");
                    break;
                }
                s.has_manifest = true;
                s.manifest = payloads::Manifest::decode(rec.payload);
                try {
                    envelope::SealedEnvelope token =
                        envelope::SealedEnvelope::decode(s.manifest.caddr_token);
                    if (token.recipient_fingerprint != operator_pk.fingerprint)
                        fail(h, "address token not sealed to the operator");
                } catch (const MalformedData&) {
                    fail(h, "address token is not a sealed envelope");
                }
                break;
            }
            case RecordKind::AuthChallenge: {
                auto it = sessions.find(rec.session_id);
                if (it == sessions.end() || !it->second.has_manifest) {
                    fail(h, "challenge before session manifest");
                    break;
                }
                payloads::Challenge c = payloads::Challenge::decode(rec.payload);
                const std::string* account = nullptr;
                for (const auto& [src, acct] : it->second.manifest.expected)
                    if (src == c.source_id) account = &acct;
                if (account == nullptr) {
                    fail(h, "challenge from a source not listed in the manifest");
                    break;
                }
                auto src_it = owners.find(c.source_id);
                if (src_it == owners.end() || !src_it->second.contains(*account)) {
                    fail(h, "challenge for an account with no registered keys");
                    break;
                }
                try {
                    envelope::SealedEnvelope env = envelope::SealedEnvelope::decode(c.sealed_nonce);
                    if (env.recipient_fingerprint != src_it->second.at(*account).second.fingerprint)
                        fail(h, "challenge not sealed to the registered owner");
                } catch (const MalformedData&) {
                    fail(h, "challenge nonce is not a sealed envelope");
                }
                it->second.challenges[c.source_id] = std::move(c);
                break;
            }
            case RecordKind::AuthResponse: {
                auto it = sessions.find(rec.session_id);
                if (it == sessions.end() || !it->second.has_manifest) {
                    fail(h, "response before session manifest");
                    break;
                }
                payloads::Response resp = payloads::Response::decode(rec.payload);
                auto ch_it = it->second.challenges.find(resp.source_id);
                if (ch_it == it->second.challenges.end()) {
                    fail(h, "response without a prior challenge");
                    break;
                }
                if (sha256(resp.nonce) != ch_it->second.nonce_hash) {
                    // Forged responses (wrong nonce) may legitimately appear on
                    // chain; they just never authenticate an upload.
                    break;
                }
                const std::string* account = nullptr;
                for (const auto& [src, acct] : it->second.manifest.expected)
                    if (src == resp.source_id) account = &acct;
                if (account == nullptr) break;
                const auto& [sig_pk, enc_pk] = owners.at(resp.source_id).at(*account);
                Bytes message = payloads::auth_message(rec.session_id, resp.source_id, resp.nonce);
                if (!envelope::verify(sig_pk, message, envelope::Signature{resp.signature})) {
                    fail(h, "response signature does not verify under the registered key");
                    break;
                }
                it->second.responded.insert(resp.source_id);
                break;
            }
            case RecordKind::AssetUpload: {
                auto it = sessions.find(rec.session_id);
                if (it == sessions.end() || !it->second.has_manifest) {
                    fail(h, "upload before session manifest");
                    break;
                }
                payloads::Upload up = payloads::Upload::decode(rec.payload);
                if (!it->second.responded.contains(up.source_id)) {
                    fail(h, "upload without verified challenge response");
                    break;
                }
                if (up.caddr_token != it->second.manifest.caddr_token) {
                    fail(h, "upload token differs from the manifest token");
                    break;
                }
                try {
                    envelope::SealedEnvelope env =
                        envelope::SealedEnvelope::decode(up.sealed_ciphertext);
                    if (env.recipient_fingerprint != relayer_pk.fingerprint)
                        fail(h, "upload not sealed to the relayer");
                } catch (const MalformedData&) {
                    fail(h, "upload body is not a sealed envelope");
                }
                it->second.uploaded.insert(up.source_id);
                break;
            }
            case RecordKind::AggregateResult: {
                auto it = sessions.find(rec.session_id);
                if (it == sessions.end() || !it->second.has_manifest) {
                    fail(h, "aggregate before session manifest");
                    break;
                }
                SessionCheck& s = it->second;
                if (s.aggregated || s.aborted) {
                    fail(h, "aggregate after session settled");
                    break;
                }
                payloads::Aggregate agg = payloads::Aggregate::decode(rec.payload);
                if (agg.caddr_token != s.manifest.caddr_token)
                    fail(h, "aggregate token differs from the manifest token");
                for (const auto& [src, acct] : s.manifest.expected)
                    if (!s.uploaded.contains(src))
                        fail(h, "aggregate before upload from source " + src);
                try {
                    he::Ciphertext ct = he::Ciphertext::decode(agg.ciphertext);
                    if (ct.key_fingerprint != he_pk.fingerprint)
                        fail(h, "aggregate ciphertext under the wrong key");
                } catch (const MalformedData&) {
                    fail(h, "aggregate ciphertext malformed");
                }
                s.aggregated = true;
                break;
            }
            case RecordKind::SessionAborted: {
                auto it = sessions.find(rec.session_id);
                if (it == sessions.end() || !it->second.has_manifest) {
                    fail(h, "abort before session manifest");
                    break;
                }
                if (it->second.aggregated) fail(h, "abort after aggregate");
                it->second.aborted = true;
                break;
            }
            case RecordKind::ProofRequest: {
                RequestCheck& r = requests[rec.session_id];
                if (r.has_request) {
                    fail(h, "duplicate proof request");
                    break;
                }
                r.has_request = true;
                r.request = payloads::Request::decode(rec.payload);
                try {
                    r.request.statement.validate();
                } catch (const StatementInvalid& e) {
                    fail(h, std::string("request statement invalid: ") + e.what());
                }
                try {
                    envelope::SealedEnvelope token =
                        envelope::SealedEnvelope::decode(r.request.caddr_token);
                    if (token.recipient_fingerprint != operator_pk.fingerprint)
                        fail(h, "request token not sealed to the operator");
                } catch (const MalformedData&) {
                    fail(h, "request token is not a sealed envelope");
                }
                break;
            }
            case RecordKind::ProofResponse: {
                auto it = requests.find(rec.session_id);
                if (it == requests.end() || !it->second.has_request) {
                    fail(h, "proof response without a request");
                    break;
                }
                RequestCheck& r = it->second;
                r.has_reply = true;
                r.reply = payloads::ProofReply::decode(rec.payload);
                if (r.reply.caddr_token != r.request.caddr_token)
                    fail(h, "response token differs from the request token");
                if (r.reply.bundle.has_value()) {
                    try {
                        zkp::ProofBundle bundle = zkp::ProofBundle::decode(*r.reply.bundle);
                        zkp::Verdict verdict =
                            zkp::verify_bundle(group, bundle, r.request.statement);
                        if (verdict.kind == zkp::Verdict::Kind::Rejected)
                            fail(h, "proof bundle fails verification");
                        r.verdict = verdict;
                    } catch (const Error& e) {
                        fail(h, std::string("proof bundle malformed: ") + e.what());
                    }
                }
                break;
            }
            case RecordKind::ServiceDecision: {
                auto it = requests.find(rec.session_id);
                if (it == requests.end() || !it->second.has_reply) {
                    fail(h, "decision without a proof response");
                    break;
                }
                RequestCheck& r = it->second;
                if (r.decided) {
                    fail(h, "duplicate decision");
                    break;
                }
                r.decided = true;
                payloads::Decision d = payloads::Decision::decode(rec.payload);
                if (d.address != r.request.requester_address)
                    fail(h, "decision address differs from the requester address");
                if (d.outcome.tier.has_value()) {
                    if (!r.verdict.has_value() || r.verdict->true_index() != *d.outcome.tier)
                        fail(h, "granted tier not established by the proof");
                } else if (d.outcome.denied == payloads::DenialReason::NoMatch) {
                    if (!r.verdict.has_value() || r.verdict->kind != zkp::Verdict::Kind::NoMatch)
                        fail(h, "NoMatch denial without a NoMatch bundle");
                } else if (d.outcome.denied == payloads::DenialReason::Timeout) {
                    if (r.reply.bundle.has_value())
                        fail(h, "Timeout denial despite an available proof");
                }
                // AddressMismatch and ProofInvalid rest on operator-private
                // state and are not re-derivable offline.
                break;
            }
        }
    }

    // Trailing integrity digest over everything before the digest line.
    std::size_t digest_pos = text.rfind("{\"digest\":");
    if (digest_pos == std::string_view::npos || text.find('\n', digest_pos) == std::string_view::npos) {
        fail(std::nullopt, "missing digest line");
        return issues;
    }
    std::string_view body = text.substr(0, digest_pos);
    std::string_view digest_line = text.substr(digest_pos);
    digest_line.remove_suffix(digest_line.size() - digest_line.find('\n'));
    try {
        ordered_json jg = ordered_json::parse(digest_line);
        std::string want = jg.at("digest").get<std::string>();
        Digest32 got = sha256(Bytes(body.begin(), body.end()));
        if (want != hex_encode(got)) fail(std::nullopt, "integrity digest mismatch");
    } catch (const nlohmann::json::exception& e) {
        fail(std::nullopt, std::string("bad digest line: ") + e.what());
    }

    return issues;
}

}  // namespace veilsum::protocol

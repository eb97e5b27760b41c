#include "veilsum/adversary.hpp"

#include <algorithm>

#include "veilsum/actors.hpp"
#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"
#include "veilsum/payloads.hpp"

namespace veilsum::adversary {

using ledger::Record;
using ledger::RecordKind;
using protocol::Transcript;

std::string CompromiseTarget::name() const {
    switch (kind) {
        case Kind::TrustedSource:
            return "source:" + source_id;
        case Kind::Relayer:
            return "relayer";
        case Kind::Zkpsp:
            return "zkpsp";
        case Kind::Operator:
            return "operator";
    }
    return "?";
}

CompromiseTarget CompromiseTarget::parse(std::string_view text) {
    CompromiseTarget t;
    if (text == "relayer") {
        t.kind = Kind::Relayer;
    } else if (text == "zkpsp") {
        t.kind = Kind::Zkpsp;
    } else if (text == "operator") {
        t.kind = Kind::Operator;
    } else if (text.rfind("source:", 0) == 0 && text.size() > 7) {
        t.kind = Kind::TrustedSource;
        t.source_id = std::string(text.substr(7));
    } else {
        throw Error("unknown compromise target: " + std::string(text));
    }
    return t;
}

EntityView compromise(const Transcript& transcript, const CompromiseTarget& target) {
    if (!transcript.meta.instrumented)
        throw Error("transcript was produced without instrumentation");
    auto it = transcript.views.find(target.name());
    if (it == transcript.views.end()) throw Error("unknown compromise target: " + target.name());
    return it->second;
}

std::string BoundsReport::to_text() const {
    std::string out = "target " + target + ": ";
    if (pass) return out + "bounds hold";
    out += "VIOLATED";
    for (const std::string& v : violations) out += "\n  " + v;
    return out;
}

BoundsReport assert_view_bounds(const CompromiseTarget& target, const EntityView& view) {
    BoundsReport report;
    report.target = target.name();
    auto violate = [&report](const std::string& field) {
        report.pass = false;
        report.violations.push_back(field);
    };

    switch (target.kind) {
        case CompromiseTarget::Kind::TrustedSource:
            if (!view.plain_addresses.empty()) violate("plain_addresses");
            if (view.has_exact_total()) violate("exact_total");
            for (const auto& [account, amount] : view.plaintext_amounts)
                if (!view.administered_accounts.contains(account))
                    violate("plaintext_amounts (foreign account " + account + ")");
            if (view.private_keys_held.contains("he-private"))
                violate("private_keys_held (he-private)");
            break;
        case CompromiseTarget::Kind::Relayer:
            if (!view.plaintext_amounts.empty()) violate("plaintext_amounts");
            if (!view.amounts_by_token.empty()) violate("amounts_by_token");
            if (view.has_exact_total()) violate("exact_total");
            if (!view.plain_addresses.empty()) violate("plain_addresses");
            if (view.private_keys_held.contains("he-private"))
                violate("private_keys_held (he-private)");
            break;
        case CompromiseTarget::Kind::Zkpsp:
            if (!view.plain_addresses.empty()) violate("plain_addresses");
            if (!view.plaintext_amounts.empty()) violate("plaintext_amounts");
            if (view.private_keys_held.contains("operator-enc-private"))
                violate("private_keys_held (operator-enc-private)");
            break;
        case CompromiseTarget::Kind::Operator:
            if (view.has_exact_total()) violate("exact_total");
            if (!view.plaintext_amounts.empty()) violate("plaintext_amounts");
            if (!view.amounts_by_token.empty()) violate("amounts_by_token");
            if (view.private_keys_held.contains("he-private"))
                violate("private_keys_held (he-private)");
            break;
    }
    return report;
}

std::string LinkageClaim::to_text() const {
    std::string out = "address " + address_hex;
    if (claimed_total.has_value()) out += " total " + std::to_string(*claimed_total);
    for (const auto& [account, amount] : claimed_amounts)
        out += " " + account + "=" + std::to_string(amount);
    return out;
}

namespace {

struct AmountFact {
    he::Amount amount = 0;
    bool is_total = false;
    std::string account;  // for partial amounts
};

}  // namespace

std::optional<LinkageClaim> attempt_linkage(std::span<const EntityView> views,
                                            const Transcript& transcript) {
    // Step 1: facts from the compromised views themselves.
    std::map<std::string, std::string> address_by_token;
    std::multimap<std::string, AmountFact> amounts_by_token;
    std::vector<std::pair<std::string, he::Amount>> known_amounts;  // (account-or-"", value)

    for (const EntityView& view : views) {
        for (const auto& [token, addr] : view.address_by_token) address_by_token[token] = addr;
        for (const auto& [token, total] : view.exact_totals) {
            amounts_by_token.insert({token, AmountFact{total, true, ""}});
            known_amounts.emplace_back("", total);
        }
        for (const auto& [token, amount] : view.amounts_by_token)
            amounts_by_token.insert({token, AmountFact{amount, false, ""}});
        for (const auto& [account, amount] : view.plaintext_amounts)
            known_amounts.emplace_back(account, amount);
    }

    // Step 2: scan public payloads for big-endian encodings of known amounts
    // (a leak of any plaintext amount onto the chain). Encodings shorter than
    // four bytes are skipped: too likely to appear in ciphertext by chance.
    std::map<std::string, std::string> token_by_session;  // session hex -> token hex
    for (const Record& rec : transcript.records) {
        if (rec.kind != RecordKind::SessionManifest) continue;
        try {
            payloads::Manifest m = payloads::Manifest::decode(rec.payload);
            token_by_session[hex_encode(rec.session_id)] = hex_encode(m.caddr_token);
        } catch (const MalformedData&) {
        }
    }
    for (const Record& rec : transcript.records) {
        auto session_it = token_by_session.find(hex_encode(rec.session_id));
        if (session_it == token_by_session.end()) continue;
        for (const auto& [account, amount] : known_amounts) {
            Bytes needle = mpz_to_bytes(mpz_class(static_cast<unsigned long>(amount)));
            if (needle.size() < 4) continue;
            auto hit = std::search(rec.payload.begin(), rec.payload.end(), needle.begin(),
                                   needle.end());
            if (hit == rec.payload.end()) continue;
            amounts_by_token.insert({session_it->second,
                                     AmountFact{amount, rec.kind == RecordKind::AggregateResult,
                                                account}});
        }
    }

    // Step 3: a claim needs an address fact and an amount fact for one token.
    for (const auto& [token, addr] : address_by_token) {
        auto [lo, hi] = amounts_by_token.equal_range(token);
        if (lo == hi) continue;
        LinkageClaim claim;
        claim.address_hex = addr;
        for (auto it = lo; it != hi; ++it) {
            if (it->second.is_total) {
                claim.claimed_total = it->second.amount;
            } else {
                std::string key = it->second.account.empty()
                                      ? "token:" + token.substr(0, 16)
                                      : it->second.account;
                claim.claimed_amounts[key] = it->second.amount;
            }
        }
        return claim;
    }
    return std::nullopt;
}

std::optional<LinkageClaim> attempt_linkage(const EntityView& view, const Transcript& transcript) {
    return attempt_linkage(std::span<const EntityView>(&view, 1), transcript);
}

std::string MaliciousReport::to_text() const {
    std::string out = pass ? "malicious-user suite: pass" : "malicious-user suite: FAIL";
    for (const std::string& c : checks) out += "\n  " + c;
    return out;
}

MaliciousReport run_malicious_suite(const protocol::ScenarioConfig& cfg) {
    MaliciousReport report;
    auto check = [&report](bool ok, const std::string& what) {
        report.checks.push_back((ok ? "ok: " : "FAIL: ") + what);
        if (!ok) report.pass = false;
    };

    bool any_malicious = false;
    for (const auto& user : cfg.users)
        if (user.malice != protocol::Malice::Honest) any_malicious = true;
    if (!any_malicious) throw Error("scenario has no malicious users");

    Transcript attack = protocol::run_scenario(cfg);

    protocol::ScenarioConfig baseline = cfg;
    baseline.users.erase(std::remove_if(baseline.users.begin(), baseline.users.end(),
                                        [](const protocol::UserSpec& u) {
                                            return u.malice != protocol::Malice::Honest;
                                        }),
                         baseline.users.end());
    if (baseline.users.empty()) throw Error("scenario has no honest users to compare");
    Transcript base = protocol::run_scenario(baseline);

    // Token of each user's own proof request, for locating attacker sessions.
    std::map<std::string, Bytes> request_token;  // user -> token bytes
    std::map<std::string, std::string> request_of_user;
    for (const auto& d : attack.decisions) request_of_user[d.user] = d.request_hex;
    for (const Record& rec : attack.records) {
        if (rec.kind != RecordKind::ProofRequest) continue;
        payloads::Request req = payloads::Request::decode(rec.payload);
        for (const auto& [user, request_hex] : request_of_user)
            if (hex_encode(rec.session_id) == request_hex) request_token[user] = req.caddr_token;
    }

    for (const auto& user : cfg.users) {
        if (user.malice == protocol::Malice::Honest) continue;
        auto decision = attack.decision_for(user.name);
        check(decision.has_value(), "attacker " + user.name + " received a decision");
        if (!decision.has_value()) continue;
        check(decision->outcome.denied.has_value(),
              "attacker " + user.name + " denied (" + decision->outcome.to_string() + ")");

        if (user.malice == protocol::Malice::Phase1ForeignAccount) {
            // The attacker's own manifest carries the token it later applies
            // with; that session must show no uploads and an abort.
            const Bytes& token = request_token[user.name];
            bool found_manifest = false;
            bool any_upload = false;
            bool aborted = false;
            for (const Record& rec : attack.records) {
                if (rec.kind == RecordKind::SessionManifest) {
                    payloads::Manifest m = payloads::Manifest::decode(rec.payload);
                    if (m.caddr_token != token) continue;
                    found_manifest = true;
                    for (const Record& other : attack.records) {
                        if (other.session_id != rec.session_id) continue;
                        if (other.kind == RecordKind::AssetUpload) any_upload = true;
                        if (other.kind == RecordKind::SessionAborted) aborted = true;
                    }
                }
            }
            check(found_manifest, "attacker " + user.name + " session located");
            check(!any_upload, "no asset upload for attacker " + user.name);
            check(aborted, "attacker " + user.name + " session aborted");
        }
        if (user.malice == protocol::Malice::Phase2ForeignCaddr) {
            check(decision->outcome.denied == payloads::DenialReason::AddressMismatch,
                  "attacker " + user.name + " denied with AddressMismatch");
        }
    }

    for (const auto& user : baseline.users) {
        if (!user.applies) continue;
        auto base_d = base.decision_for(user.name);
        auto attack_d = attack.decision_for(user.name);
        check(base_d.has_value() && attack_d.has_value(),
              "honest user " + user.name + " decided in both runs");
        if (!base_d.has_value() || !attack_d.has_value()) continue;
        check(base_d->payload == attack_d->payload && base_d->request_hex == attack_d->request_hex,
              "honest user " + user.name + " decision byte-identical across runs");
    }
    return report;
}

}  // namespace veilsum::adversary

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "veilsum/actors.hpp"
#include "veilsum/ledger.hpp"
#include "veilsum/scenario.hpp"
#include "veilsum/view.hpp"

namespace veilsum::protocol {

// Self-contained run artifact: metadata (including every public key offline
// re-verification needs), the full ledger dump, the final decisions, the
// per-entity instrumentation views, and a trailing integrity digest over the
// whole text.

struct RegistryKeyInfo {
    std::string owner_sig_pk_hex;
    std::string owner_enc_pk_hex;
};

struct TranscriptMeta {
    std::string version = "veilsum-transcript/v1";
    std::string tool = "veilsum 0.1.0";
    Profile profile = Profile::test;
    std::uint64_t seed = 0;
    std::string group_name;
    bool instrumented = true;
    bool production_keys = false;  // watermark: reduced key sizes when false
    std::string operator_enc_pk_hex;
    std::string relayer_enc_pk_hex;
    std::string zkpsp_he_pk_hex;
    // source id -> account id -> owner public keys
    std::map<std::string, std::map<std::string, RegistryKeyInfo>> registry_keys;
    // user name -> address hex (report affordance; addresses are public)
    std::map<std::string, std::string> user_addresses;
};

struct Transcript {
    TranscriptMeta meta;
    std::vector<ledger::Record> records;
    std::vector<DecisionSummary> decisions;
    std::map<std::string, adversary::EntityView> views;
    bool any_aborted = false;

    std::string to_text() const;
    void write_file(const std::string& path) const;
    static Transcript from_text(std::string_view text);  // throws MalformedData
    static Transcript from_file(const std::string& path);

    std::optional<DecisionSummary> decision_for(std::string_view user_name) const;
};

struct VerifyIssue {
    std::optional<std::uint64_t> height;  // record height when attributable
    std::string message;

    std::string to_string() const;
};

// Offline re-verification of a transcript text: parse structure, height
// density, per-session phase ordering, signatures, envelope fingerprints,
// proof bundles against their statements, decision consistency, and the
// trailing integrity digest. Empty result means the transcript checks out.
std::vector<VerifyIssue> verify_transcript_text(std::string_view text);

}  // namespace veilsum::protocol

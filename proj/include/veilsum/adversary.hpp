#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "veilsum/scenario.hpp"
#include "veilsum/transcript.hpp"
#include "veilsum/view.hpp"

namespace veilsum::adversary {

// Executable single-entity compromise model: reconstruct everything one
// participant knew from the transcript's instrumentation records, check the
// per-role knowledge bounds, and run a concrete linkage attacker against the
// view plus the public ledger.

struct CompromiseTarget {
    enum class Kind { TrustedSource, Relayer, Zkpsp, Operator };
    Kind kind = Kind::Relayer;
    std::string source_id;  // set for TrustedSource

    std::string name() const;
    // "source:<id>" | "relayer" | "zkpsp" | "operator"; throws Error otherwise.
    static CompromiseTarget parse(std::string_view text);
};

// View assembled purely from the instrumentation records of that entity.
// Throws Error for an unknown target or an uninstrumented transcript.
EntityView compromise(const protocol::Transcript& transcript, const CompromiseTarget& target);

struct BoundsReport {
    std::string target;
    bool pass = true;
    std::vector<std::string> violations;  // named offending fields

    std::string to_text() const;
};

// Structural knowledge bounds per role: a source never sees addresses or
// totals and only its own accounts' amounts; the relayer sees neither
// plaintext amounts nor addresses and holds no decryption key for the
// aggregate; the zkpsp never sees an address; the operator never sees an
// exact total or per-source amounts.
BoundsReport assert_view_bounds(const CompromiseTarget& target, const EntityView& view);

struct LinkageClaim {
    std::string address_hex;
    std::optional<he::Amount> claimed_total;
    std::map<std::string, he::Amount> claimed_amounts;

    std::string to_text() const;
};

// Fixed, documented best-effort attacker: joins the view's address facts and
// amount facts by address-token equality, augmented by a byte-substring scan
// of public payloads for the big-endian encodings of view-known amounts
// (encodings shorter than four bytes are skipped as noise). Returns a claim
// only when an (address, exact amount or total) pair is established.
std::optional<LinkageClaim> attempt_linkage(const EntityView& view,
                                            const protocol::Transcript& transcript);
// Collusion variant: the union of several views. The protocol's guarantee is
// single-entity; this documents what any two colluding entities get.
std::optional<LinkageClaim> attempt_linkage(std::span<const EntityView> views,
                                            const protocol::Transcript& transcript);

struct MaliciousReport {
    bool pass = true;
    std::vector<std::string> checks;

    std::string to_text() const;
};

// Runs the scenario with its malicious users, then the same scenario without
// them, and asserts: the attackers end denied, phase-1 attackers trigger no
// upload, and every honest user's decision is byte-identical across the two
// runs.
MaliciousReport run_malicious_suite(const protocol::ScenarioConfig& cfg);

}  // namespace veilsum::adversary

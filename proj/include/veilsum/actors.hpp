#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "veilsum/envelope.hpp"
#include "veilsum/group.hpp"
#include "veilsum/ledger.hpp"
#include "veilsum/paillier.hpp"
#include "veilsum/payloads.hpp"
#include "veilsum/scenario.hpp"
#include "veilsum/view.hpp"

namespace veilsum::protocol {

// The five roles as deterministic ledger-driven state machines. Actors share
// nothing but the ledger; the scheduler activates them round-robin and each
// activation consumes the records appended since the actor's cursor.

// Public key material every participant may see.
struct PublicDirectory {
    envelope::RsaPublic operator_enc_pk;
    envelope::RsaPublic relayer_enc_pk;
    he::PublicKey zkpsp_he_pk;
    zkp::GroupParams group;
};

// Negative-control switches: each grants one entity a key it must never hold
// and makes it compute (and record) the forbidden value through the normal
// instrumentation hooks. Used to prove the leakage assertions have teeth.
struct LeakProfile {
    bool source_computes_addresses = false;
    bool relayer_decrypts = false;
    bool zkpsp_opens_tokens = false;
    bool operator_decrypts = false;

    bool any() const {
        return source_computes_addresses || relayer_decrypts || zkpsp_opens_tokens ||
               operator_decrypts;
    }
};

// The user's phase-2 service application, handed to the operator by the
// driver (the one scripted user/operator interaction; its content is
// republished on the ledger in the ProofRequest record).
struct Application {
    Bytes caddr_token;
    envelope::Address requester_address;
    std::string user_name;  // driver bookkeeping, not protocol data
};

class UserAgent {
public:
    UserAgent(const UserSpec& spec, envelope::EntityKeys keys, const PublicDirectory& dir,
              Drbg rng, adversary::EntityView* view);

    const std::string& name() const { return spec_.name; }
    const envelope::Address& address() const { return address_; }
    const UserSpec& spec() const { return spec_; }
    const ledger::SessionId& session() const { return session_id_; }
    const Bytes& caddr_token() const { return caddr_token_; }

    // Seals the address token once and appends the session manifest.
    ledger::SessionId begin_session(ledger::Ledger& chain, std::uint64_t now);

    // Reacts to one ledger record (challenges for this session; aggregate or
    // abort marks the session settled).
    void on_record(const ledger::Record& rec, ledger::Ledger& chain, std::uint64_t now);

    bool wants_to_apply() const;
    // The phase-1 attacker seals the victim's address instead of its own;
    // the phase-2 attacker applies with the victim's token.
    void grant_victim_knowledge(const envelope::Address& victim_address, Bytes victim_token);
    Application make_application();

private:
    UserSpec spec_;
    envelope::EntityKeys keys_;
    envelope::Address address_;
    const PublicDirectory& dir_;
    Drbg rng_;
    adversary::EntityView* view_;

    ledger::SessionId session_id_{};
    Bytes caddr_token_;
    bool session_started_ = false;
    bool session_settled_ = false;
    bool applied_ = false;
    envelope::Address victim_address_{};
    Bytes victim_token_;
};

class SourceAgent {
public:
    struct AccountRecord {
        he::Amount amount = 0;
        envelope::RsaPublic owner_sig_pk;
        envelope::RsaPublic owner_enc_pk;
    };

    SourceAgent(std::string source_id, envelope::EntityKeys keys,
                std::map<std::string, AccountRecord> registry, const PublicDirectory& dir,
                Drbg rng, adversary::EntityView* view, const LeakProfile& leaks);

    const std::string& id() const { return id_; }
    bool session_failed(const ledger::SessionId& session) const {
        return failed_.contains(session);
    }
    bool malicious_user_detected() const { return malicious_detected_; }

    void on_record(const ledger::Record& rec, ledger::Ledger& chain, std::uint64_t now);

private:
    void issue_challenge(const ledger::SessionId& session, const payloads::Manifest& manifest,
                         ledger::Ledger& chain, std::uint64_t now);
    void handle_response(const ledger::Record& rec, ledger::Ledger& chain, std::uint64_t now);

    struct PendingAuth {
        Bytes nonce;
        std::string account;
        Bytes caddr_token;
    };

    std::string id_;
    envelope::EntityKeys keys_;
    std::map<std::string, AccountRecord> registry_;
    const PublicDirectory& dir_;
    Drbg rng_;
    adversary::EntityView* view_;
    bool leak_addresses_ = false;

    std::map<ledger::SessionId, PendingAuth> issued_;
    std::set<ledger::SessionId> failed_;
    bool malicious_detected_ = false;
};

class RelayerAgent {
public:
    RelayerAgent(envelope::EntityKeys keys, const PublicDirectory& dir, Drbg rng,
                 adversary::EntityView* view, std::uint32_t timeout_heights);

    void on_record(const ledger::Record& rec, ledger::Ledger& chain, std::uint64_t now);
    // Aborts sessions that stopped progressing. With `force` every incomplete
    // session is aborted regardless of height (used at quiescence).
    void check_timeouts(ledger::Ledger& chain, std::uint64_t now, bool force);
    bool has_incomplete_sessions() const;

    // Negative control: hand the relayer the decryption key it must not have.
    void grant_he_private(he::PrivateKey sk) { leaked_he_sk_ = std::move(sk); }

private:
    void try_aggregate(const ledger::SessionId& session, ledger::Ledger& chain, std::uint64_t now);

    struct PendingSession {
        Bytes caddr_token;
        std::vector<std::string> expected;  // source ids still missing
        std::vector<he::Ciphertext> collected;
        std::uint64_t last_progress = 0;
        bool settled = false;  // aggregated or aborted
    };

    envelope::EntityKeys keys_;
    const PublicDirectory& dir_;
    Drbg rng_;
    adversary::EntityView* view_;
    std::uint32_t timeout_heights_;
    std::map<ledger::SessionId, PendingSession> pending_;
    std::optional<he::PrivateKey> leaked_he_sk_;
};

class ZkpspAgent {
public:
    ZkpspAgent(he::PublicKey he_pk, he::PrivateKey he_sk, const PublicDirectory& dir, Drbg rng,
               adversary::EntityView* view);

    void on_record(const ledger::Record& rec, ledger::Ledger& chain, std::uint64_t now);

    // Negative control: the zkpsp must never be able to open address tokens.
    void grant_operator_enc_private(envelope::RsaPrivate sk) { leaked_operator_sk_ = std::move(sk); }

private:
    he::PublicKey he_pk_;
    he::PrivateKey he_sk_;
    const PublicDirectory& dir_;
    Drbg rng_;
    adversary::EntityView* view_;
    std::map<std::string, he::Ciphertext> aggregates_;  // token hex -> blind sum
    std::optional<envelope::RsaPrivate> leaked_operator_sk_;
};

struct DecisionSummary {
    std::string user;  // empty when the requester address maps to no known user
    std::string address_hex;
    std::string request_hex;
    payloads::Outcome outcome;
    Bytes payload;  // exact ServiceDecision payload bytes
};

class OperatorAgent {
public:
    OperatorAgent(envelope::EntityKeys keys, zkp::RangeStatement tiers, const PublicDirectory& dir,
                  Drbg rng, adversary::EntityView* view);

    // Validates the tier statement and publishes the proof request carrying
    // the applicant's token and address.
    void submit_application(const Application& app, ledger::Ledger& chain, std::uint64_t now);

    void on_record(const ledger::Record& rec, ledger::Ledger& chain, std::uint64_t now);

    const std::vector<DecisionSummary>& decisions() const { return decisions_; }
    const zkp::RangeStatement& tiers() const { return tiers_; }

    // Negative control: the operator must never see the aggregation key.
    void grant_he_private(he::PrivateKey sk) { leaked_he_sk_ = std::move(sk); }

private:
    struct PendingRequest {
        Bytes caddr_token;
        envelope::Address requester;
        std::string user_name;
    };

    envelope::EntityKeys keys_;
    zkp::RangeStatement tiers_;
    const PublicDirectory& dir_;
    Drbg rng_;
    adversary::EntityView* view_;
    std::map<ledger::SessionId, PendingRequest> pending_;
    std::vector<DecisionSummary> decisions_;
    std::optional<he::PrivateKey> leaked_he_sk_;
};

struct RunOptions {
    bool instrument = true;
    LeakProfile leaks;
};

struct Transcript;  // defined in transcript.hpp

// Owns the ledger, the actors and the scheduler for one scenario run.
class World {
public:
    World(ScenarioConfig cfg, RunOptions options = {});
    ~World();
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    // Drives both phases to quiescence and assembles the transcript.
    Transcript run();

    const ScenarioConfig& config() const { return cfg_; }
    const PublicDirectory& directory() const { return *dir_; }
    const he::PrivateKey& zkpsp_he_private() const;      // test oracle access
    const envelope::EntityKeys& operator_keys() const;   // test oracle access
    ledger::Ledger& chain() { return ledger_; }

private:
    struct Impl;
    ScenarioConfig cfg_;
    RunOptions options_;
    ledger::Ledger ledger_;
    std::unique_ptr<PublicDirectory> dir_;
    std::unique_ptr<Impl> impl_;
};

// Convenience wrapper: validate, build, run.
Transcript run_scenario(const ScenarioConfig& cfg, RunOptions options = {});

}  // namespace veilsum::protocol

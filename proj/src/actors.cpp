#include "veilsum/actors.hpp"

#include <algorithm>
#include <deque>

#include "veilsum/errors.hpp"
#include "veilsum/mpzutil.hpp"
#include "veilsum/transcript.hpp"

namespace veilsum::protocol {

using ledger::Ledger;
using ledger::Record;
using ledger::RecordKind;
using ledger::SessionId;

static std::string session_author(const SessionId& session) {
    return "session:" + hex_encode(session).substr(0, 16);
}

static std::string token_hex(const Bytes& token) {
    return hex_encode(token);
}

// ---------------------------------------------------------------------------
// UserAgent

UserAgent::UserAgent(const UserSpec& spec, envelope::EntityKeys keys, const PublicDirectory& dir,
                     Drbg rng, adversary::EntityView* view)
    : spec_(spec),
      keys_(std::move(keys)),
      address_(envelope::address_of(keys_.sig_public)),
      dir_(dir),
      rng_(std::move(rng)),
      view_(view) {
    if (view_ != nullptr) {
        view_->entity = "user:" + spec_.name;
        view_->private_keys_held.insert("enc-private");
        view_->private_keys_held.insert("sig-private");
    }
}

void UserAgent::grant_victim_knowledge(const envelope::Address& victim_address,
                                       Bytes victim_token) {
    victim_address_ = victim_address;
    if (!victim_token.empty()) victim_token_ = std::move(victim_token);
}

SessionId UserAgent::begin_session(Ledger& chain, std::uint64_t now) {
    if (spec_.accounts.empty()) throw Error("begin_session: no sources listed");
    if (session_started_) throw Error("begin_session: session already started");

    Bytes sid = rng_.bytes(16);
    std::copy(sid.begin(), sid.end(), session_id_.begin());

    // The address token is sealed exactly once per session and reused
    // verbatim; it is the cross-entity correlation handle.
    const envelope::Address& sealed_addr =
        spec_.malice == Malice::Phase1ForeignAccount ? victim_address_ : address_;
    caddr_token_ = envelope::seal(dir_.operator_enc_pk, sealed_addr.bytes, rng_).encode();

    payloads::Manifest manifest;
    manifest.caddr_token = caddr_token_;
    manifest.expected = spec_.accounts;
    chain.append(RecordKind::SessionManifest, session_id_, session_author(session_id_),
                 manifest.encode(), now);
    session_started_ = true;
    return session_id_;
}

void UserAgent::on_record(const Record& rec, Ledger& chain, std::uint64_t now) {
    if (!session_started_ || rec.session_id != session_id_) return;

    if (rec.kind == RecordKind::AuthChallenge) {
        payloads::Challenge challenge;
        try {
            challenge = payloads::Challenge::decode(rec.payload);
        } catch (const MalformedData&) {
            return;
        }
        payloads::Response response;
        response.source_id = challenge.source_id;
        try {
            envelope::SealedEnvelope env = envelope::SealedEnvelope::decode(challenge.sealed_nonce);
            response.nonce = envelope::open(keys_.enc_private, env);
            if (view_ != nullptr) {
                view_->open_calls++;
                view_->opened_nonces.push_back(hex_encode(response.nonce));
            }
        } catch (const Error&) {
            // Challenge not openable with this keypair. The phase-1 attacker
            // pushes a forged response anyway; an honest user ignores it.
            if (spec_.malice != Malice::Phase1ForeignAccount) return;
            response.nonce = rng_.bytes(32);
        }
        Bytes message =
            payloads::auth_message(session_id_, response.source_id, response.nonce);
        response.signature = envelope::sign(keys_.sig_private, message, rng_).bytes;
        chain.append(RecordKind::AuthResponse, session_id_, session_author(session_id_),
                     response.encode(), now);
        return;
    }

    if (rec.kind == RecordKind::AggregateResult || rec.kind == RecordKind::SessionAborted)
        session_settled_ = true;
}

bool UserAgent::wants_to_apply() const {
    if (!spec_.applies || applied_ || !session_settled_) return false;
    if (spec_.malice == Malice::Phase2ForeignCaddr && victim_token_.empty()) return false;
    return true;
}

Application UserAgent::make_application() {
    applied_ = true;
    Application app;
    app.user_name = spec_.name;
    app.requester_address = address_;
    app.caddr_token =
        spec_.malice == Malice::Phase2ForeignCaddr ? victim_token_ : caddr_token_;
    return app;
}

// ---------------------------------------------------------------------------
// SourceAgent

SourceAgent::SourceAgent(std::string source_id, envelope::EntityKeys keys,
                         std::map<std::string, AccountRecord> registry,
                         const PublicDirectory& dir, Drbg rng, adversary::EntityView* view,
                         const LeakProfile& leaks)
    : id_(std::move(source_id)),
      keys_(std::move(keys)),
      registry_(std::move(registry)),
      dir_(dir),
      rng_(std::move(rng)),
      view_(view),
      leak_addresses_(leaks.source_computes_addresses) {
    if (view_ != nullptr) {
        view_->entity = "source:" + id_;
        view_->private_keys_held.insert("enc-private");
        view_->private_keys_held.insert("sig-private");
        for (const auto& [account, rec] : registry_) {
            view_->plaintext_amounts[account] = rec.amount;
            view_->administered_accounts.insert(account);
        }
    }
}

void SourceAgent::on_record(const Record& rec, Ledger& chain, std::uint64_t now) {
    if (rec.kind == RecordKind::SessionManifest) {
        payloads::Manifest manifest;
        try {
            manifest = payloads::Manifest::decode(rec.payload);
        } catch (const MalformedData&) {
            return;
        }
        issue_challenge(rec.session_id, manifest, chain, now);
        return;
    }
    if (rec.kind == RecordKind::AuthResponse) handle_response(rec, chain, now);
}

void SourceAgent::issue_challenge(const SessionId& session, const payloads::Manifest& manifest,
                                  Ledger& chain, std::uint64_t now) {
    const std::string* account = nullptr;
    for (const auto& [source, acct] : manifest.expected)
        if (source == id_) account = &acct;
    if (account == nullptr) return;  // session does not involve this source

    if (view_ != nullptr) view_->note_token(token_hex(manifest.caddr_token));

    auto it = registry_.find(*account);
    if (it == registry_.end()) {
        // Unknown account: refuse silently, the session will time out.
        failed_.insert(session);
        return;
    }

    Bytes nonce = rng_.bytes(32);
    payloads::Challenge challenge;
    challenge.source_id = id_;
    challenge.sealed_nonce = envelope::seal(it->second.owner_enc_pk, nonce, rng_).encode();
    challenge.nonce_hash = sha256(nonce);
    chain.append(RecordKind::AuthChallenge, session, "source:" + id_, challenge.encode(), now);
    issued_[session] = PendingAuth{std::move(nonce), *account, manifest.caddr_token};
}

void SourceAgent::handle_response(const Record& rec, Ledger& chain, std::uint64_t now) {
    auto it = issued_.find(rec.session_id);
    if (it == issued_.end()) return;
    payloads::Response response;
    try {
        response = payloads::Response::decode(rec.payload);
    } catch (const MalformedData&) {
        return;
    }
    if (response.source_id != id_) return;

    const PendingAuth& pending = it->second;
    const AccountRecord& account = registry_.at(pending.account);

    Bytes message = payloads::auth_message(rec.session_id, id_, response.nonce);
    bool authentic = response.nonce == pending.nonce &&
                     envelope::verify(account.owner_sig_pk, message,
                                      envelope::Signature{response.signature});
    if (!authentic) {
        // Wrong key or wrong nonce: the claimant does not own the account.
        malicious_detected_ = true;
        failed_.insert(rec.session_id);
        issued_.erase(it);
        return;
    }

    he::Ciphertext ct = he::encrypt(dir_.zkpsp_he_pk, account.amount, rng_);
    payloads::Upload upload;
    upload.source_id = id_;
    upload.caddr_token = pending.caddr_token;
    upload.sealed_ciphertext = envelope::seal(dir_.relayer_enc_pk, ct.encode(), rng_).encode();
    chain.append(RecordKind::AssetUpload, rec.session_id, "source:" + id_, upload.encode(), now);

    if (view_ != nullptr) {
        view_->amounts_by_token[token_hex(pending.caddr_token)] = account.amount;
        if (leak_addresses_) {
            // Negative control: derive the owner's chain address, which an
            // honest source never computes.
            view_->plain_addresses.push_back(envelope::address_of(account.owner_sig_pk).hex());
        }
    }
    issued_.erase(it);
}

// ---------------------------------------------------------------------------
// RelayerAgent

RelayerAgent::RelayerAgent(envelope::EntityKeys keys, const PublicDirectory& dir, Drbg rng,
                           adversary::EntityView* view, std::uint32_t timeout_heights)
    : keys_(std::move(keys)),
      dir_(dir),
      rng_(std::move(rng)),
      view_(view),
      timeout_heights_(timeout_heights) {
    if (view_ != nullptr) {
        view_->entity = "relayer";
        view_->private_keys_held.insert("enc-private");
        view_->private_keys_held.insert("sig-private");
    }
}

void RelayerAgent::on_record(const Record& rec, Ledger& chain, std::uint64_t now) {
    if (rec.kind == RecordKind::SessionManifest) {
        payloads::Manifest manifest;
        try {
            manifest = payloads::Manifest::decode(rec.payload);
        } catch (const MalformedData&) {
            return;
        }
        PendingSession pending;
        pending.caddr_token = manifest.caddr_token;
        for (const auto& [source, account] : manifest.expected) pending.expected.push_back(source);
        pending.last_progress = rec.height;
        pending_[rec.session_id] = std::move(pending);
        if (view_ != nullptr) view_->note_token(token_hex(manifest.caddr_token));
        return;
    }

    if (rec.kind != RecordKind::AssetUpload) return;
    auto it = pending_.find(rec.session_id);
    if (it == pending_.end() || it->second.settled) return;
    PendingSession& pending = it->second;

    payloads::Upload upload;
    try {
        upload = payloads::Upload::decode(rec.payload);
    } catch (const MalformedData&) {
        return;
    }
    auto expected_it = std::find(pending.expected.begin(), pending.expected.end(), upload.source_id);
    if (expected_it == pending.expected.end()) return;  // duplicate or uninvited source

    auto abort_session = [&](const std::string& reason) {
        payloads::Abort ab{reason};
        chain.append(RecordKind::SessionAborted, rec.session_id, "relayer", ab.encode(), now);
        pending.settled = true;
    };

    if (upload.caddr_token != pending.caddr_token) {
        abort_session("token-mismatch");
        return;
    }

    he::Ciphertext inner;
    try {
        envelope::SealedEnvelope env = envelope::SealedEnvelope::decode(upload.sealed_ciphertext);
        Bytes plain = envelope::open(keys_.enc_private, env);
        if (view_ != nullptr) {
            view_->open_calls++;
            view_->held_ciphertexts.push_back(hex_encode(plain));
        }
        inner = he::Ciphertext::decode(plain);
    } catch (const Error&) {
        abort_session("upload-unreadable");
        return;
    }
    if (inner.key_fingerprint != dir_.zkpsp_he_pk.fingerprint) {
        abort_session("fingerprint-mismatch");
        return;
    }

    pending.collected.push_back(std::move(inner));
    pending.expected.erase(expected_it);
    pending.last_progress = rec.height;
    if (pending.expected.empty()) try_aggregate(rec.session_id, chain, now);
}

void RelayerAgent::try_aggregate(const SessionId& session, Ledger& chain, std::uint64_t now) {
    PendingSession& pending = pending_.at(session);
    he::Ciphertext sum = he::add_many(dir_.zkpsp_he_pk, pending.collected);

    payloads::Aggregate aggregate;
    aggregate.caddr_token = pending.caddr_token;
    aggregate.ciphertext = sum.encode();
    chain.append(RecordKind::AggregateResult, session, "relayer", aggregate.encode(), now);
    pending.settled = true;

    if (leaked_he_sk_.has_value() && view_ != nullptr) {
        // Negative control: a relayer holding the aggregation key can read
        // the blind sum it just produced.
        he::Amount total = he::decrypt_amount(*leaked_he_sk_, sum);
        view_->he_decrypt_calls++;
        view_->exact_totals.emplace_back(token_hex(pending.caddr_token), total);
    }
}

void RelayerAgent::check_timeouts(Ledger& chain, std::uint64_t now, bool force) {
    if (chain.height() == 0) return;
    std::uint64_t top = chain.height() - 1;
    for (auto& [session, pending] : pending_) {
        if (pending.settled) continue;
        bool timed_out = top - pending.last_progress >= timeout_heights_;
        if (!force && !timed_out) continue;
        payloads::Abort ab{force ? "stalled" : "timeout"};
        chain.append(RecordKind::SessionAborted, session, "relayer", ab.encode(), now);
        pending.settled = true;
    }
}

bool RelayerAgent::has_incomplete_sessions() const {
    for (const auto& [session, pending] : pending_)
        if (!pending.settled) return true;
    return false;
}

// ---------------------------------------------------------------------------
// ZkpspAgent

ZkpspAgent::ZkpspAgent(he::PublicKey he_pk, he::PrivateKey he_sk, const PublicDirectory& dir,
                       Drbg rng, adversary::EntityView* view)
    : he_pk_(std::move(he_pk)),
      he_sk_(std::move(he_sk)),
      dir_(dir),
      rng_(std::move(rng)),
      view_(view) {
    if (view_ != nullptr) {
        view_->entity = "zkpsp";
        view_->private_keys_held.insert("he-private");
    }
}

void ZkpspAgent::on_record(const Record& rec, Ledger& chain, std::uint64_t now) {
    if (rec.kind == RecordKind::AggregateResult) {
        payloads::Aggregate aggregate;
        try {
            aggregate = payloads::Aggregate::decode(rec.payload);
            aggregates_[token_hex(aggregate.caddr_token)] =
                he::Ciphertext::decode(aggregate.ciphertext);
        } catch (const MalformedData&) {
            return;
        }
        if (view_ != nullptr) view_->note_token(token_hex(aggregate.caddr_token));
        return;
    }

    if (rec.kind != RecordKind::ProofRequest) return;
    payloads::Request request;
    try {
        request = payloads::Request::decode(rec.payload);
    } catch (const MalformedData&) {
        return;
    }
    const std::string token = token_hex(request.caddr_token);
    const std::string request_hex = hex_encode(rec.session_id);
    if (view_ != nullptr) view_->note_token(token);

    payloads::ProofReply reply;
    reply.caddr_token = request.caddr_token;

    auto it = aggregates_.find(token);
    if (it != aggregates_.end()) {
        he::Amount result = he::decrypt_amount(he_sk_, it->second);
        if (view_ != nullptr) {
            view_->he_decrypt_calls++;
            view_->exact_totals.emplace_back(token, result);
        }
        try {
            Drbg prover_rng = rng_.child("respond/" + token + "/" + request_hex);
            zkp::ProofBundle bundle = zkp::respond(dir_.group, result, request.statement, prover_rng);
            reply.bundle = bundle.encode();
            if (view_ != nullptr) {
                view_->respond_calls++;
                view_->responses.emplace_back(
                    request_hex, bundle.matched_index.has_value()
                                     ? "matched:" + std::to_string(*bundle.matched_index)
                                     : "nomatch");
            }
        } catch (const StatementInvalid&) {
            reply.bundle.reset();
        }
    }

    if (leaked_operator_sk_.has_value() && view_ != nullptr) {
        // Negative control: with the operator's key the zkpsp can open the
        // very token it is answering about.
        try {
            Bytes addr = envelope::open(*leaked_operator_sk_,
                                        envelope::SealedEnvelope::decode(request.caddr_token));
            view_->open_calls++;
            view_->plain_addresses.push_back(hex_encode(addr));
            view_->address_by_token[token] = hex_encode(addr);
        } catch (const Error&) {
        }
    }

    chain.append(RecordKind::ProofResponse, rec.session_id, "zkpsp", reply.encode(), now);
}

// ---------------------------------------------------------------------------
// OperatorAgent

OperatorAgent::OperatorAgent(envelope::EntityKeys keys, zkp::RangeStatement tiers,
                             const PublicDirectory& dir, Drbg rng, adversary::EntityView* view)
    : keys_(std::move(keys)),
      tiers_(std::move(tiers)),
      dir_(dir),
      rng_(std::move(rng)),
      view_(view) {
    if (view_ != nullptr) {
        view_->entity = "operator";
        view_->private_keys_held.insert("enc-private");
        view_->private_keys_held.insert("sig-private");
    }
}

void OperatorAgent::submit_application(const Application& app, Ledger& chain, std::uint64_t now) {
    tiers_.validate();

    // Request ids are a pure function of the application so that one user's
    // id never depends on which other users exist in the scenario.
    ByteWriter idw;
    idw.put_str("veilsum/request-id/v1");
    idw.put_blob(app.caddr_token);
    idw.put_raw(app.requester_address.bytes);
    Digest16 rid = fingerprint16("veilsum/request-id/v1", idw.bytes());
    SessionId request_id{};
    std::copy(rid.begin(), rid.end(), request_id.begin());

    payloads::Request request;
    request.caddr_token = app.caddr_token;
    std::copy(app.requester_address.bytes.begin(), app.requester_address.bytes.end(),
              request.requester_address.begin());
    request.statement = tiers_;
    chain.append(RecordKind::ProofRequest, request_id, "operator", request.encode(), now);
    pending_[request_id] = PendingRequest{app.caddr_token, app.requester_address, app.user_name};
}

void OperatorAgent::on_record(const Record& rec, Ledger& chain, std::uint64_t now) {
    if (rec.kind != RecordKind::ProofResponse) return;
    auto it = pending_.find(rec.session_id);
    if (it == pending_.end()) return;
    const PendingRequest& pending = it->second;
    const std::string request_hex = hex_encode(rec.session_id);

    payloads::ProofReply reply;
    try {
        reply = payloads::ProofReply::decode(rec.payload);
    } catch (const MalformedData&) {
        return;
    }

    payloads::Outcome outcome;
    const std::string token = token_hex(pending.caddr_token);

    // The address check comes first: the token must open to the address the
    // applicant claims to act for.
    std::optional<envelope::Address> sealed_addr;
    try {
        Bytes plain = envelope::open(keys_.enc_private,
                                     envelope::SealedEnvelope::decode(pending.caddr_token));
        if (plain.size() == 20) {
            envelope::Address a;
            std::copy(plain.begin(), plain.end(), a.bytes.begin());
            sealed_addr = a;
            if (view_ != nullptr) {
                view_->open_calls++;
                view_->plain_addresses.push_back(a.hex());
                view_->address_by_token[token] = a.hex();
            }
        }
    } catch (const Error&) {
    }

    if (!sealed_addr.has_value() || !(*sealed_addr == pending.requester)) {
        outcome.denied = payloads::DenialReason::AddressMismatch;
    } else if (!reply.bundle.has_value()) {
        // No aggregate behind the token: the upload session never completed.
        outcome.denied = payloads::DenialReason::Timeout;
    } else {
        try {
            zkp::ProofBundle bundle = zkp::ProofBundle::decode(*reply.bundle);
            zkp::Verdict verdict = zkp::verify_bundle(dir_.group, bundle, tiers_);
            if (view_ != nullptr)
                view_->interval_labels.emplace_back(request_hex, verdict.to_string());
            switch (verdict.kind) {
                case zkp::Verdict::Kind::Labels:
                    outcome.tier = verdict.true_index();
                    break;
                case zkp::Verdict::Kind::NoMatch:
                    outcome.denied = payloads::DenialReason::NoMatch;
                    break;
                case zkp::Verdict::Kind::Rejected:
                    outcome.denied = payloads::DenialReason::ProofInvalid;
                    break;
            }
        } catch (const MalformedData&) {
            outcome.denied = payloads::DenialReason::ProofInvalid;
        }
    }

    if (leaked_he_sk_.has_value() && view_ != nullptr) {
        // Negative control: scrape the public aggregate for this token and
        // decrypt it with the leaked key.
        for (const Record& other : chain.records()) {
            if (other.kind != RecordKind::AggregateResult) continue;
            try {
                payloads::Aggregate aggregate = payloads::Aggregate::decode(other.payload);
                if (aggregate.caddr_token != pending.caddr_token) continue;
                he::Amount total =
                    he::decrypt_amount(*leaked_he_sk_, he::Ciphertext::decode(aggregate.ciphertext));
                view_->he_decrypt_calls++;
                view_->exact_totals.emplace_back(token, total);
            } catch (const Error&) {
            }
        }
    }

    payloads::Decision decision;
    std::copy(pending.requester.bytes.begin(), pending.requester.bytes.end(),
              decision.address.begin());
    decision.outcome = outcome;
    Bytes payload = decision.encode();
    chain.append(RecordKind::ServiceDecision, rec.session_id, "operator", payload, now);

    DecisionSummary summary;
    summary.user = pending.user_name;
    summary.address_hex = pending.requester.hex();
    summary.request_hex = request_hex;
    summary.outcome = outcome;
    summary.payload = std::move(payload);
    decisions_.push_back(std::move(summary));
    pending_.erase(it);
}

// ---------------------------------------------------------------------------
// World

struct World::Impl {
    envelope::EntityKeys operator_keys;
    envelope::EntityKeys relayer_keys;
    he::PublicKey he_pk;
    he::PrivateKey he_sk;
    std::map<std::string, std::map<std::string, RegistryKeyInfo>> registry_keys;

    std::map<std::string, adversary::EntityView> views;
    std::vector<std::unique_ptr<UserAgent>> users;
    std::vector<std::unique_ptr<SourceAgent>> sources;
    std::unique_ptr<RelayerAgent> relayer;
    std::unique_ptr<ZkpspAgent> zkpsp;
    std::unique_ptr<OperatorAgent> op;

    std::map<std::string, std::uint64_t> cursors;
    std::deque<Application> applications;
    std::uint64_t clock = 0;
};

const he::PrivateKey& World::zkpsp_he_private() const { return impl_->he_sk; }
const envelope::EntityKeys& World::operator_keys() const { return impl_->operator_keys; }

World::~World() = default;

World::World(ScenarioConfig cfg, RunOptions options)
    : cfg_(std::move(cfg)), options_(options), impl_(std::make_unique<Impl>()) {
    cfg_.validate();

    Drbg root(cfg_.seed);
    const envelope::KeyProfile kp =
        cfg_.profile == Profile::full ? envelope::KeyProfile::full : envelope::KeyProfile::test;
    {
        Drbg r = root.child("keys/operator");
        impl_->operator_keys = envelope::keygen(kp, r);
    }
    {
        Drbg r = root.child("keys/relayer");
        impl_->relayer_keys = envelope::keygen(kp, r);
    }
    {
        Drbg he_rng = root.child("keys/zkpsp-he");
        unsigned he_bits = cfg_.profile == Profile::full ? 2048 : 512;
        auto [pk, sk] = he::keygen(he_bits, he_rng);
        impl_->he_pk = std::move(pk);
        impl_->he_sk = std::move(sk);
    }

    dir_ = std::make_unique<PublicDirectory>();
    dir_->operator_enc_pk = impl_->operator_keys.enc_public;
    dir_->relayer_enc_pk = impl_->relayer_keys.enc_public;
    dir_->zkpsp_he_pk = impl_->he_pk;
    dir_->group = zkp::group_setup(cfg_.profile == Profile::full ? zkp::GroupProfile::full
                                                                 : zkp::GroupProfile::test);

    // Keys for every distinct account owner (users and other customers).
    std::map<std::string, envelope::EntityKeys> owner_keys;
    auto keys_for = [&](const std::string& name) -> envelope::EntityKeys& {
        auto it = owner_keys.find(name);
        if (it != owner_keys.end()) return it->second;
        Drbg r = root.child("keys/user/" + name);
        return owner_keys.emplace(name, envelope::keygen(kp, r)).first->second;
    };
    for (const SourceSpec& src : cfg_.sources)
        for (const RegistryEntry& entry : src.registry) keys_for(entry.owner);
    for (const UserSpec& user : cfg_.users) keys_for(user.name);

    auto view_for = [&](const std::string& id) -> adversary::EntityView* {
        if (!options_.instrument) return nullptr;
        return &impl_->views[id];
    };

    // Per-user totals must be encryptable and commitable without wraparound.
    for (const UserSpec& user : cfg_.users) {
        he::Amount total = cfg_.honest_total(user);
        mpz_class t(static_cast<unsigned long>(total));
        if (t >= impl_->he_pk.n || t >= dir_->group.q)
            throw ValidationError("users", "total exceeds modulus for user " + user.name);
    }

    for (const UserSpec& user : cfg_.users) {
        impl_->users.push_back(std::make_unique<UserAgent>(
            user, keys_for(user.name), *dir_, root.child("user/" + user.name),
            view_for("user:" + user.name)));
    }

    // Addresses must be collision-free within the scenario.
    std::set<std::string> addr_set;
    for (const auto& u : impl_->users)
        if (!addr_set.insert(u->address().hex()).second)
            throw ValidationError("users", "address collision between users");

    for (const SourceSpec& src : cfg_.sources) {
        std::map<std::string, SourceAgent::AccountRecord> registry;
        for (const RegistryEntry& entry : src.registry) {
            const envelope::EntityKeys& owner = keys_for(entry.owner);
            registry[entry.account] =
                SourceAgent::AccountRecord{entry.amount, owner.sig_public, owner.enc_public};
            impl_->registry_keys[src.id][entry.account] =
                RegistryKeyInfo{hex_encode(owner.sig_public.encode()),
                                hex_encode(owner.enc_public.encode())};
        }
        Drbg r = root.child("keys/source/" + src.id);
        impl_->sources.push_back(std::make_unique<SourceAgent>(
            src.id, envelope::keygen(kp, r), std::move(registry), *dir_,
            root.child("source/" + src.id), view_for("source:" + src.id), options_.leaks));
    }

    impl_->relayer = std::make_unique<RelayerAgent>(impl_->relayer_keys, *dir_,
                                                    root.child("relayer"), view_for("relayer"),
                                                    cfg_.timeout_heights);
    impl_->zkpsp = std::make_unique<ZkpspAgent>(impl_->he_pk, impl_->he_sk, *dir_,
                                                root.child("zkpsp"), view_for("zkpsp"));
    impl_->op = std::make_unique<OperatorAgent>(impl_->operator_keys, cfg_.tiers, *dir_,
                                                root.child("operator"), view_for("operator"));

    // Negative-control key grants.
    if (options_.leaks.relayer_decrypts) {
        impl_->relayer->grant_he_private(impl_->he_sk);
        if (options_.instrument) impl_->views["relayer"].private_keys_held.insert("he-private");
    }
    if (options_.leaks.zkpsp_opens_tokens) {
        impl_->zkpsp->grant_operator_enc_private(impl_->operator_keys.enc_private);
        if (options_.instrument)
            impl_->views["zkpsp"].private_keys_held.insert("operator-enc-private");
    }
    if (options_.leaks.operator_decrypts) {
        impl_->op->grant_he_private(impl_->he_sk);
        if (options_.instrument) impl_->views["operator"].private_keys_held.insert("he-private");
    }

    // Attackers know their victim's public address; the phase-2 attacker is
    // additionally handed the victim's token once it exists.
    for (std::size_t i = 0; i < cfg_.users.size(); ++i) {
        const UserSpec& spec = cfg_.users[i];
        if (spec.malice == Malice::Honest) continue;
        for (const auto& other : impl_->users) {
            if (other->name() == spec.victim)
                impl_->users[i]->grant_victim_knowledge(other->address(), {});
        }
    }
}

Transcript World::run() {
    Impl& w = *impl_;

    auto activate = [&](const std::string& key, auto&& handler) {
        w.clock++;
        std::uint64_t from = w.cursors[key];
        std::uint64_t end = ledger_.height();
        for (std::uint64_t h = from; h < end; ++h) {
            Record rec = ledger_.at(h);  // copy: appends may reallocate
            handler(rec);
        }
        w.cursors[key] = ledger_.height();  // skip own appends
    };

    // Phase 1 openings: one session per user, in config order.
    for (auto& user : w.users) {
        w.clock++;
        user->begin_session(ledger_, w.clock);
    }
    // Hand phase-2 attackers their victim's (now existing) token.
    for (std::size_t i = 0; i < cfg_.users.size(); ++i) {
        const UserSpec& spec = cfg_.users[i];
        if (spec.malice != Malice::Phase2ForeignCaddr) continue;
        for (const auto& other : w.users)
            if (other->name() == spec.victim)
                w.users[i]->grant_victim_knowledge(other->address(), other->caddr_token());
    }

    const std::uint64_t kMaxRounds = 100000;
    for (std::uint64_t round = 0; round < kMaxRounds; ++round) {
        std::uint64_t start_height = ledger_.height();

        for (auto& source : w.sources)
            activate("source:" + source->id(),
                     [&](const Record& rec) { source->on_record(rec, ledger_, w.clock); });

        for (auto& user : w.users) {
            activate("user:" + user->name(),
                     [&](const Record& rec) { user->on_record(rec, ledger_, w.clock); });
            if (user->wants_to_apply()) w.applications.push_back(user->make_application());
        }

        activate("relayer", [&](const Record& rec) { w.relayer->on_record(rec, ledger_, w.clock); });
        w.relayer->check_timeouts(ledger_, w.clock, false);

        activate("zkpsp", [&](const Record& rec) { w.zkpsp->on_record(rec, ledger_, w.clock); });

        w.clock++;
        while (!w.applications.empty()) {
            w.op->submit_application(w.applications.front(), ledger_, w.clock);
            w.applications.pop_front();
        }
        activate("operator", [&](const Record& rec) { w.op->on_record(rec, ledger_, w.clock); });

        if (ledger_.height() == start_height) {
            // Quiescent round: force out stalled sessions, then stop.
            if (w.relayer->has_incomplete_sessions()) {
                w.clock++;
                w.relayer->check_timeouts(ledger_, w.clock, true);
                continue;
            }
            break;
        }
    }

    Transcript t;
    t.meta.profile = cfg_.profile;
    t.meta.seed = cfg_.seed;
    t.meta.group_name = dir_->group.name;
    t.meta.instrumented = options_.instrument;
    t.meta.production_keys = cfg_.profile == Profile::full;
    t.meta.operator_enc_pk_hex = hex_encode(dir_->operator_enc_pk.encode());
    t.meta.relayer_enc_pk_hex = hex_encode(dir_->relayer_enc_pk.encode());
    t.meta.zkpsp_he_pk_hex = hex_encode(dir_->zkpsp_he_pk.encode());

    t.meta.registry_keys = w.registry_keys;
    for (const auto& user : w.users) t.meta.user_addresses[user->name()] = user->address().hex();

    t.records = ledger_.records();
    t.decisions = w.op->decisions();
    if (options_.instrument) t.views = w.views;
    for (const Record& rec : t.records)
        if (rec.kind == RecordKind::SessionAborted) t.any_aborted = true;
    return t;
}

Transcript run_scenario(const ScenarioConfig& cfg, RunOptions options) {
    World world(cfg, options);
    return world.run();
}

}  // namespace veilsum::protocol

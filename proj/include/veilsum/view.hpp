#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "veilsum/bytes.hpp"
#include "veilsum/paillier.hpp"

namespace veilsum::adversary {

// Instrumentation record of one entity: precisely the plaintext-equivalent
// data the entity computed or stored during a run, captured by hooks at each
// decrypt/open/respond call site rather than re-derived afterwards. Views are
// embedded in the transcript and are what a compromise of that entity reveals.
struct EntityView {
    std::string entity;

    // Source: registered account amounts (its own book).
    std::map<std::string, he::Amount> plaintext_amounts;
    // Source: the amount it attached to a session token when uploading.
    std::map<std::string, he::Amount> amounts_by_token;
    // Accounts this entity administers; amounts outside this set are foreign.
    std::set<std::string> administered_accounts;

    // Zkpsp (and leaky variants): decrypted aggregate per token, one entry
    // per decrypt call.
    std::vector<std::pair<std::string, he::Amount>> exact_totals;

    // Addresses the entity recovered in the clear, one entry per computation.
    std::vector<std::string> plain_addresses;
    // Operator: which token opened to which address.
    std::map<std::string, std::string> address_by_token;

    // Session tokens observed in records the entity handled.
    std::vector<std::string> caddr_tokens;

    // Relayer: inner homomorphic ciphertexts recovered from envelopes.
    std::vector<std::string> held_ciphertexts;

    // Users: challenge nonces opened.
    std::vector<std::string> opened_nonces;

    // Operator: verdict labels per request. Zkpsp: proof responses issued.
    std::vector<std::pair<std::string, std::string>> interval_labels;
    std::vector<std::pair<std::string, std::string>> responses;

    // Key role tags, e.g. "enc-private", "sig-private", "he-private".
    std::set<std::string> private_keys_held;

    // Call counters for the instrumentation-totality cross-check.
    std::uint64_t open_calls = 0;
    std::uint64_t he_decrypt_calls = 0;
    std::uint64_t respond_calls = 0;

    bool has_exact_total() const { return !exact_totals.empty(); }

    void note_token(const std::string& token_hex);

    std::string to_json_text() const;
    static EntityView from_json_text(const std::string& entity, const std::string& text);
};

}  // namespace veilsum::adversary

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "veilsum/paillier.hpp"
#include "veilsum/rangeproof.hpp"

namespace veilsum::protocol {

enum class Profile { test, full };

std::string profile_name(Profile profile);
Profile profile_from_name(std::string_view name);  // throws ValidationError

struct RegistryEntry {
    std::string account;
    std::string owner;  // user name whose keys the account is registered to
    he::Amount amount = 0;
};

struct SourceSpec {
    std::string id;
    std::vector<RegistryEntry> registry;
};

enum class Malice {
    Honest,
    // Phase 1 attack: presents the victim's sealed address and claims the
    // victim's accounts; cannot answer the challenges.
    Phase1ForeignAccount,
    // Phase 2 attack: uploads honestly, then applies for service with the
    // victim's address token.
    Phase2ForeignCaddr,
};

std::string malice_name(Malice malice);

struct UserSpec {
    std::string name;
    // (source_id, account_id) in manifest order.
    std::vector<std::pair<std::string, std::string>> accounts;
    Malice malice = Malice::Honest;
    std::string victim;   // required for malicious users
    bool applies = true;  // whether the user requests service in phase 2
};

struct ScenarioConfig {
    Profile profile = Profile::test;
    std::uint64_t seed = 0;
    std::uint32_t timeout_heights = 64;
    std::vector<SourceSpec> sources;
    std::vector<UserSpec> users;
    zkp::RangeStatement tiers;

    // Throws ValidationError naming the offending field.
    void validate() const;

    const SourceSpec* find_source(std::string_view id) const;
    const UserSpec* find_user(std::string_view name) const;
    // Sum of the amounts registered to `user` over its account list.
    he::Amount honest_total(const UserSpec& user) const;

    std::string to_text() const;
    static ScenarioConfig from_text(std::string_view text);
    static ScenarioConfig from_file(const std::string& path);
};

}  // namespace veilsum::protocol

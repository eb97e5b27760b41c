#include "veilsum/view.hpp"

#include <json.hpp>

#include <algorithm>

#include "veilsum/errors.hpp"

namespace veilsum::adversary {

using ordered_json = nlohmann::ordered_json;

void EntityView::note_token(const std::string& token_hex) {
    if (std::find(caddr_tokens.begin(), caddr_tokens.end(), token_hex) == caddr_tokens.end())
        caddr_tokens.push_back(token_hex);
}

static ordered_json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& v) {
    ordered_json out = ordered_json::array();
    for (const auto& [a, b] : v) out.push_back(ordered_json::array({a, b}));
    return out;
}

std::string EntityView::to_json_text() const {
    ordered_json j;
    j["plaintext_amounts"] = ordered_json::object();
    for (const auto& [account, amount] : plaintext_amounts) j["plaintext_amounts"][account] = amount;
    j["amounts_by_token"] = ordered_json::object();
    for (const auto& [token, amount] : amounts_by_token) j["amounts_by_token"][token] = amount;
    j["administered_accounts"] = administered_accounts;
    j["exact_totals"] = ordered_json::array();
    for (const auto& [token, total] : exact_totals)
        j["exact_totals"].push_back(ordered_json::array({token, total}));
    j["plain_addresses"] = plain_addresses;
    j["address_by_token"] = ordered_json::object();
    for (const auto& [token, addr] : address_by_token) j["address_by_token"][token] = addr;
    j["caddr_tokens"] = caddr_tokens;
    j["held_ciphertexts"] = held_ciphertexts;
    j["opened_nonces"] = opened_nonces;
    j["interval_labels"] = pairs_to_json(interval_labels);
    j["responses"] = pairs_to_json(responses);
    j["private_keys_held"] = private_keys_held;
    j["open_calls"] = open_calls;
    j["he_decrypt_calls"] = he_decrypt_calls;
    j["respond_calls"] = respond_calls;
    return j.dump();
}

EntityView EntityView::from_json_text(const std::string& entity, const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
        EntityView v;
        v.entity = entity;
        for (const auto& [k, val] : j.at("plaintext_amounts").items())
            v.plaintext_amounts[k] = val.get<he::Amount>();
        for (const auto& [k, val] : j.at("amounts_by_token").items())
            v.amounts_by_token[k] = val.get<he::Amount>();
        for (const auto& a : j.at("administered_accounts"))
            v.administered_accounts.insert(a.get<std::string>());
        for (const auto& e : j.at("exact_totals"))
            v.exact_totals.emplace_back(e[0].get<std::string>(), e[1].get<he::Amount>());
        v.plain_addresses = j.at("plain_addresses").get<std::vector<std::string>>();
        for (const auto& [k, val] : j.at("address_by_token").items())
            v.address_by_token[k] = val.get<std::string>();
        v.caddr_tokens = j.at("caddr_tokens").get<std::vector<std::string>>();
        v.held_ciphertexts = j.at("held_ciphertexts").get<std::vector<std::string>>();
        v.opened_nonces = j.at("opened_nonces").get<std::vector<std::string>>();
        for (const auto& e : j.at("interval_labels"))
            v.interval_labels.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        for (const auto& e : j.at("responses"))
            v.responses.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        for (const auto& a : j.at("private_keys_held")) v.private_keys_held.insert(a.get<std::string>());
        v.open_calls = j.at("open_calls").get<std::uint64_t>();
        v.he_decrypt_calls = j.at("he_decrypt_calls").get<std::uint64_t>();
        v.respond_calls = j.at("respond_calls").get<std::uint64_t>();
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedData(std::string("bad entity view encoding: ") + e.what());
    }
}

}  // namespace veilsum::adversary

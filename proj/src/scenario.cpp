#include "veilsum/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "veilsum/errors.hpp"

namespace veilsum::protocol {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string profile_name(Profile profile) {
    return profile == Profile::full ? "full" : "test";
}

Profile profile_from_name(std::string_view name) {
    if (name == "test") return Profile::test;
    if (name == "full") return Profile::full;
    throw ValidationError("profile", "must be \"test\" or \"full\"");
}

std::string malice_name(Malice malice) {
    switch (malice) {
        case Malice::Honest:
            return "honest";
        case Malice::Phase1ForeignAccount:
            return "phase1-foreign-account";
        case Malice::Phase2ForeignCaddr:
            return "phase2-foreign-caddr";
    }
    return "?";
}

static Malice malice_from_name(std::string_view name, const std::string& field) {
    if (name == "honest") return Malice::Honest;
    if (name == "phase1-foreign-account") return Malice::Phase1ForeignAccount;
    if (name == "phase2-foreign-caddr") return Malice::Phase2ForeignCaddr;
    throw ValidationError(field, "unknown malice kind");
}

const SourceSpec* ScenarioConfig::find_source(std::string_view id) const {
    for (const SourceSpec& s : sources)
        if (s.id == id) return &s;
    return nullptr;
}

const UserSpec* ScenarioConfig::find_user(std::string_view name) const {
    for (const UserSpec& u : users)
        if (u.name == name) return &u;
    return nullptr;
}

he::Amount ScenarioConfig::honest_total(const UserSpec& user) const {
    unsigned __int128 total = 0;
    for (const auto& [source_id, account] : user.accounts) {
        const SourceSpec* src = find_source(source_id);
        if (src == nullptr) continue;
        for (const RegistryEntry& entry : src->registry)
            if (entry.account == account) total += entry.amount;
    }
    return static_cast<he::Amount>(total);
}

// Per-user totals must stay far below every modulus in play (HE modulus and
// commitment group order are at least 2^159 in the test profile).
static constexpr unsigned __int128 kMaxTotal = static_cast<unsigned __int128>(1) << 62;

void ScenarioConfig::validate() const {
    if (timeout_heights == 0) throw ValidationError("timeout_heights", "must be at least 1");

    if (sources.empty()) throw ValidationError("sources", "must list at least one source");
    std::set<std::string> source_ids;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const std::string path = "sources[" + std::to_string(i) + "]";
        const SourceSpec& src = sources[i];
        if (src.id.empty()) throw ValidationError(path + ".id", "must be nonempty");
        if (!source_ids.insert(src.id).second) throw ValidationError(path + ".id", "duplicate source id");
        std::set<std::string> accounts;
        for (std::size_t k = 0; k < src.registry.size(); ++k) {
            const std::string epath = path + ".registry[" + std::to_string(k) + "]";
            const RegistryEntry& entry = src.registry[k];
            if (entry.account.empty()) throw ValidationError(epath + ".account", "must be nonempty");
            if (!accounts.insert(entry.account).second)
                throw ValidationError(epath + ".account", "duplicate account id");
            if (entry.owner.empty()) throw ValidationError(epath + ".owner", "must be nonempty");
            if (static_cast<unsigned __int128>(entry.amount) >= kMaxTotal)
                throw ValidationError(epath + ".amount", "exceeds supported range");
        }
    }

    if (users.empty()) throw ValidationError("users", "must list at least one user");
    std::set<std::string> user_names;
    for (std::size_t i = 0; i < users.size(); ++i) {
        const std::string path = "users[" + std::to_string(i) + "]";
        const UserSpec& user = users[i];
        if (user.name.empty()) throw ValidationError(path + ".name", "must be nonempty");
        if (!user_names.insert(user.name).second)
            throw ValidationError(path + ".name", "duplicate user name");
        if (user.accounts.empty())
            throw ValidationError(path + ".accounts", "must list at least one source account");

        std::set<std::string> seen_sources;
        unsigned __int128 total = 0;
        for (std::size_t k = 0; k < user.accounts.size(); ++k) {
            const std::string apath = path + ".accounts[" + std::to_string(k) + "]";
            const auto& [source_id, account] = user.accounts[k];
            const SourceSpec* src = find_source(source_id);
            if (src == nullptr) throw ValidationError(apath, "references unknown source " + source_id);
            if (!seen_sources.insert(source_id).second)
                throw ValidationError(apath, "duplicate source in account list");
            // An account missing from the source registry is allowed: the
            // source refuses the session and it times out. A registered
            // account owned by someone else is only legal for the phase-1
            // attacker, whose point is claiming foreign data.
            for (const RegistryEntry& entry : src->registry) {
                if (entry.account != account) continue;
                total += entry.amount;
                if (entry.owner != user.name && user.malice != Malice::Phase1ForeignAccount)
                    throw ValidationError(apath, "account registered to a different owner");
            }
        }
        if (total >= kMaxTotal) throw ValidationError(path + ".accounts", "total exceeds supported range");

        if (user.malice != Malice::Honest) {
            const std::string vpath = path + ".victim";
            if (user.victim.empty()) throw ValidationError(vpath, "required for malicious users");
            if (user.victim == user.name) throw ValidationError(vpath, "must name another user");
            if (find_user(user.victim) == nullptr)
                throw ValidationError(vpath, "references unknown user " + user.victim);
        }
    }

    try {
        tiers.validate();
    } catch (const StatementInvalid& e) {
        throw ValidationError("tiers", e.what());
    }
}

static std::string ctx(const std::string& path) { return path; }

template <typename T>
static T get_field(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw ValidationError(ctx(path) + "." + key, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(ctx(path) + "." + key, "wrong type");
    }
}

ScenarioConfig ScenarioConfig::from_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError("(document)", std::string("not valid json: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("(document)", "top level must be an object");

    ScenarioConfig cfg;
    cfg.profile = profile_from_name(get_field<std::string>(j, "profile", "(document)"));
    cfg.seed = get_field<std::uint64_t>(j, "seed", "(document)");
    if (j.contains("timeout_heights"))
        cfg.timeout_heights = get_field<std::uint32_t>(j, "timeout_heights", "(document)");

    if (!j.contains("sources") || !j.at("sources").is_array())
        throw ValidationError("sources", "missing or not an array");
    std::size_t si = 0;
    for (const json& js : j.at("sources")) {
        const std::string path = "sources[" + std::to_string(si++) + "]";
        SourceSpec src;
        src.id = get_field<std::string>(js, "id", path);
        if (js.contains("registry")) {
            if (!js.at("registry").is_array()) throw ValidationError(path + ".registry", "not an array");
            std::size_t ri = 0;
            for (const json& je : js.at("registry")) {
                const std::string epath = path + ".registry[" + std::to_string(ri++) + "]";
                RegistryEntry entry;
                entry.account = get_field<std::string>(je, "account", epath);
                entry.owner = get_field<std::string>(je, "owner", epath);
                entry.amount = get_field<std::uint64_t>(je, "amount", epath);
                src.registry.push_back(std::move(entry));
            }
        }
        cfg.sources.push_back(std::move(src));
    }

    if (!j.contains("users") || !j.at("users").is_array())
        throw ValidationError("users", "missing or not an array");
    std::size_t ui = 0;
    for (const json& ju : j.at("users")) {
        const std::string path = "users[" + std::to_string(ui++) + "]";
        UserSpec user;
        user.name = get_field<std::string>(ju, "name", path);
        if (!ju.contains("accounts") || !ju.at("accounts").is_array())
            throw ValidationError(path + ".accounts", "missing or not an array");
        for (const json& ja : ju.at("accounts")) {
            if (!ja.is_array() || ja.size() != 2 || !ja[0].is_string() || !ja[1].is_string())
                throw ValidationError(path + ".accounts", "entries must be [source_id, account_id]");
            user.accounts.emplace_back(ja[0].get<std::string>(), ja[1].get<std::string>());
        }
        if (ju.contains("malice"))
            user.malice = malice_from_name(ju.at("malice").get<std::string>(), path + ".malice");
        if (ju.contains("victim")) user.victim = ju.at("victim").get<std::string>();
        if (ju.contains("applies")) user.applies = get_field<bool>(ju, "applies", path);
        cfg.users.push_back(std::move(user));
    }

    if (!j.contains("tiers") || !j.at("tiers").is_array())
        throw ValidationError("tiers", "missing or not an array");
    std::size_t ti = 0;
    for (const json& jt : j.at("tiers")) {
        const std::string path = "tiers[" + std::to_string(ti++) + "]";
        zkp::Interval iv;
        iv.lo = get_field<std::uint64_t>(jt, "lo", path);
        iv.hi = get_field<std::uint64_t>(jt, "hi", path);
        cfg.tiers.intervals.push_back(iv);
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("(file)", "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

std::string ScenarioConfig::to_text() const {
    ordered_json j;
    j["profile"] = profile_name(profile);
    j["seed"] = seed;
    j["timeout_heights"] = timeout_heights;
    j["sources"] = ordered_json::array();
    for (const SourceSpec& src : sources) {
        ordered_json js;
        js["id"] = src.id;
        js["registry"] = ordered_json::array();
        for (const RegistryEntry& entry : src.registry) {
            ordered_json je;
            je["account"] = entry.account;
            je["owner"] = entry.owner;
            je["amount"] = entry.amount;
            js["registry"].push_back(je);
        }
        j["sources"].push_back(js);
    }
    j["users"] = ordered_json::array();
    for (const UserSpec& user : users) {
        ordered_json ju;
        ju["name"] = user.name;
        ju["accounts"] = ordered_json::array();
        for (const auto& [source_id, account] : user.accounts)
            ju["accounts"].push_back(ordered_json::array({source_id, account}));
        if (user.malice != Malice::Honest) {
            ju["malice"] = malice_name(user.malice);
            ju["victim"] = user.victim;
        }
        ju["applies"] = user.applies;
        j["users"].push_back(ju);
    }
    j["tiers"] = ordered_json::array();
    for (const zkp::Interval& iv : tiers.intervals) {
        ordered_json jt;
        jt["lo"] = iv.lo;
        jt["hi"] = iv.hi;
        j["tiers"].push_back(jt);
    }
    return j.dump(2);
}

}  // namespace veilsum::protocol

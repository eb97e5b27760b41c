#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "veilsum/adversary.hpp"
#include "veilsum/errors.hpp"
#include "veilsum/transcript.hpp"

using namespace veilsum;

namespace {

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> profile, const std::string& out_path, bool no_instrument) {
    protocol::ScenarioConfig cfg;
    try {
        cfg = protocol::ScenarioConfig::from_file(scenario_path);
        if (seed.has_value()) cfg.seed = *seed;
        if (profile.has_value()) {
            cfg.profile = protocol::profile_from_name(*profile);
        } else if (const char* env = std::getenv("VEILSUM_PROFILE")) {
            cfg.profile = protocol::profile_from_name(env);
        }
        cfg.validate();
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    protocol::RunOptions options;
    options.instrument = !no_instrument;
    protocol::Transcript transcript = protocol::run_scenario(cfg, options);
    transcript.write_file(out_path);

    for (const auto& d : transcript.decisions)
        std::cout << "decision " << (d.user.empty() ? d.address_hex : d.user) << ": "
                  << d.outcome.to_string() << "\n";
    std::cout << "transcript written to " << out_path << " (" << transcript.records.size()
              << " records)\n";
    if (transcript.any_aborted) {
        std::cout << "one or more sessions aborted\n";
        return 2;
    }
    return 0;
}

int cmd_verify(const std::string& transcript_path) {
    std::string text;
    try {
        std::ifstream f(transcript_path, std::ios::binary);
        if (!f) throw Error("cannot open " + transcript_path);
        std::stringstream buf;
        buf << f.rdbuf();
        text = buf.str();
    } catch (const Error& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return 1;
    }

    std::vector<protocol::VerifyIssue> issues = protocol::verify_transcript_text(text);
    if (issues.empty()) {
        std::cout << "transcript ok\n";
        return 0;
    }
    std::cerr << "verify failed: " << issues.front().to_string() << "\n";
    for (std::size_t i = 1; i < issues.size(); ++i)
        std::cerr << "  also: " << issues[i].to_string() << "\n";
    return 1;
}

void print_view_summary(const adversary::EntityView& view) {
    std::cout << "  view: " << view.plaintext_amounts.size() << " account amounts, "
              << view.exact_totals.size() << " decrypted totals, " << view.plain_addresses.size()
              << " plain addresses, " << view.caddr_tokens.size() << " tokens, "
              << view.held_ciphertexts.size() << " held ciphertexts\n";
    if (view.has_exact_total())
        std::cout << "  totals known: yes (no address attached: "
                  << (view.address_by_token.empty() ? "true" : "false") << ")\n";
}

int attack_one(const protocol::Transcript& transcript, const adversary::CompromiseTarget& target) {
    adversary::EntityView view = adversary::compromise(transcript, target);
    adversary::BoundsReport bounds = adversary::assert_view_bounds(target, view);
    std::cout << bounds.to_text() << "\n";
    print_view_summary(view);
    auto claim = adversary::attempt_linkage(view, transcript);
    if (claim.has_value()) {
        std::cout << "  linkage: ESTABLISHED " << claim->to_text() << "\n";
    } else {
        std::cout << "  linkage: none\n";
    }
    return bounds.pass && !claim.has_value() ? 0 : 1;
}

int cmd_attack(const std::string& transcript_path, const std::string& target_text) {
    protocol::Transcript transcript;
    try {
        transcript = protocol::Transcript::from_file(transcript_path);
    } catch (const Error& e) {
        std::cerr << "attack: " << e.what() << "\n";
        return 1;
    }

    try {
        if (target_text == "all") {
            int rc = 0;
            std::vector<std::string> targets = {"relayer", "zkpsp", "operator"};
            for (const auto& [entity, view] : transcript.views)
                if (entity.rfind("source:", 0) == 0) targets.insert(targets.begin(), entity);
            for (const std::string& t : targets)
                rc |= attack_one(transcript, adversary::CompromiseTarget::parse(t));
            return rc;
        }
        return attack_one(transcript, adversary::CompromiseTarget::parse(target_text));
    } catch (const Error& e) {
        std::cerr << "attack: " << e.what() << "\n";
        return 1;
    }
}

int cmd_dump(const std::string& transcript_path) {
    try {
        protocol::Transcript transcript = protocol::Transcript::from_file(transcript_path);
        for (const auto& rec : transcript.records) std::cout << rec.dump_line() << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "dump: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preserving asset verification simulator"};
    app.require_subcommand(1);

    std::string scenario_path, transcript_path, out_path = "transcript.jsonl";
    std::string target = "all";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> profile;
    bool no_instrument = false;

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write the transcript");
    run->add_option("scenario", scenario_path, "scenario config file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--profile", profile, "key-size profile: test or full");
    run->add_option("--out", out_path, "transcript output path");
    run->add_flag("--no-instrument", no_instrument, "disable per-entity instrumentation views");

    CLI::App* verify = app.add_subcommand("verify", "re-verify a transcript offline");
    verify->add_option("transcript", transcript_path, "transcript file")->required();

    CLI::App* attack = app.add_subcommand("attack", "compromise one entity and report its view");
    attack->add_option("transcript", transcript_path, "transcript file")->required();
    attack->add_option("--target", target, "source:<id> | relayer | zkpsp | operator | all");

    CLI::App* dump = app.add_subcommand("dump", "print the ledger records of a transcript");
    dump->add_option("transcript", transcript_path, "transcript file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, seed, profile, out_path, no_instrument);
        if (verify->parsed()) return cmd_verify(transcript_path);
        if (attack->parsed()) return cmd_attack(transcript_path, target);
        if (dump->parsed()) return cmd_dump(transcript_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ehrdeleg/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pre-delegated multi-party EHR access simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<uint64_t> seed;
    std::optional<std::string> profile;
    CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario config");
    run_cmd->add_option("config", config_path, "scenario config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--seed", seed, "override the config seed");
    run_cmd->add_option("--profile", profile, "override the cipher profile")
        ->check(CLI::IsMember({"toy", "production"}));

    std::string audit_dir;
    CLI::App* audit_cmd =
        app.add_subcommand("audit", "recompute the who-knows-what audit");
    audit_cmd->add_option("dir", audit_dir, "run output directory")->required();

    std::string replay_dir;
    CLI::App* replay_cmd =
        app.add_subcommand("replay", "re-execute a run and compare ledgers");
    replay_cmd->add_option("dir", replay_dir, "run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        return ehrdeleg::scenario::run(config_path, out_dir, seed, profile);
    }
    if (audit_cmd->parsed()) {
        return ehrdeleg::scenario::audit_cli(audit_dir);
    }
    if (replay_cmd->parsed()) {
        return ehrdeleg::scenario::replay_cli(replay_dir);
    }
    return 2;
}

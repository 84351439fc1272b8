#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ehrdeleg/scenario.hpp"
#include "json.hpp"

using namespace ehrdeleg;
using namespace ehrdeleg::scenario;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(EHRDELEG_SCENARIO_DIR) + "/" + name;
}

std::string temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("ehrdeleg_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("config validation") {
    std::string good = slurp(scenario_path("happy_path_3_2.json"));
    ScenarioConfig config = ScenarioConfig::from_json_text(good);
    CHECK(config.threshold.n == 3);
    CHECK(config.steps.size() == 6);

    CHECK_THROWS_AS(ScenarioConfig::from_json_text("{not json"), ConfigError);

    // t > n
    std::string bad_t = good;
    bad_t.replace(bad_t.find("\"t\": 2"), 6, "\"t\": 9");
    CHECK_THROWS_AS(ScenarioConfig::from_json_text(bad_t), ConfigError);

    // n != notaries + 1
    std::string bad_n = good;
    bad_n.replace(bad_n.find("\"notaries\": 2"), 13, "\"notaries\": 3");
    CHECK_THROWS_AS(ScenarioConfig::from_json_text(bad_n), ConfigError);
}

TEST_CASE("bundled scenarios execute with all expectations met") {
    for (const char* name :
         {"happy_path_3_2.json", "expiry.json", "revocation.json", "stolen_vc.json",
          "tamper_suite.json", "collusion_matrix.json", "cascade_mode.json"}) {
        CAPTURE(name);
        ScenarioConfig config = ScenarioConfig::load_file(scenario_path(name));
        ExecutedScenario executed = execute(config);
        for (const auto& step : executed.steps) {
            CAPTURE(step.index);
            CAPTURE(step.op);
            CAPTURE(step.outcome);
            CHECK(step.ok);
        }
        CHECK(executed.steps_ok);
        CHECK(executed.system->ledger().verify_chain());
    }
}

TEST_CASE("determinism: same seed, byte-identical ledger, for every bundled scenario") {
    for (const char* name :
         {"happy_path_3_2.json", "expiry.json", "revocation.json", "stolen_vc.json",
          "tamper_suite.json", "collusion_matrix.json", "unlinkability.json",
          "cascade_mode.json"}) {
        CAPTURE(name);
        ScenarioConfig config = ScenarioConfig::load_file(scenario_path(name));
        ExecutedScenario a = execute(config);
        ExecutedScenario b = execute(config);
        CHECK(a.system->ledger().export_text() == b.system->ledger().export_text());
        CHECK(a.system->transcript().to_jsonl() == b.system->transcript().to_jsonl());
    }

    ScenarioConfig config =
        ScenarioConfig::load_file(scenario_path("happy_path_3_2.json"));
    ExecutedScenario a = execute(config);
    config.seed += 1;
    ExecutedScenario c = execute(config);
    CHECK(a.system->ledger().export_text() != c.system->ledger().export_text());
}

TEST_CASE("audit matches the reference matrix on the happy path") {
    ScenarioConfig config =
        ScenarioConfig::load_file(scenario_path("happy_path_3_2.json"));
    ExecutedScenario executed = execute(config);
    AuditInputs inputs = audit_inputs_from_system(*executed.system);
    AuditReport report = compute_audit(inputs, true);
    for (const auto& item : report.items) {
        for (const auto& column : report.columns) {
            CAPTURE(item);
            CAPTURE(column);
            CHECK(report.cells.at(item).at(column).pass);
        }
    }
    CHECK(report.all_pass);
}

TEST_CASE("audit soundness: an injected leak flips the custodian cell") {
    ScenarioConfig config =
        ScenarioConfig::load_file(scenario_path("happy_path_3_2.json"));
    ExecutedScenario executed = execute(config);
    AuditInputs clean = audit_inputs_from_system(*executed.system);
    REQUIRE(compute_audit(clean, true).all_pass);

    Bytes sk = clean.sk;
    REQUIRE_FALSE(sk.empty());
    executed.system->ehr_store().inject_state_for_tests("debug_dump", sk);

    AuditInputs leaked = audit_inputs_from_system(*executed.system);
    AuditReport report = compute_audit(leaked, true);
    CHECK_FALSE(report.all_pass);
    CHECK_FALSE(report.cells.at("secret_key").at("DC").pass);
    CHECK(report.cells.at("secret_key").at("DC").computed == Knowledge::yes);
}

TEST_CASE("empty scenario audits to a blank matrix except registered DIDs") {
    ScenarioConfig config;
    config.seed = 5;
    config.notaries = 2;
    config.drs = 1;
    config.threshold = {3, 2};
    ExecutedScenario executed = execute(config);
    AuditInputs inputs = audit_inputs_from_system(*executed.system);
    AuditReport report = compute_audit(inputs, false);
    for (const auto& item : report.items) {
        for (const auto& column : report.columns) {
            Knowledge computed = report.cells.at(item).at(column).computed;
            if (item == "do_did") continue;  // identities are registered
            CAPTURE(item);
            CAPTURE(column);
            CHECK(computed == Knowledge::no);
        }
    }
    CHECK(report.cells.at("do_did").at("Outsider").computed == Knowledge::yes);
}

TEST_CASE("run/audit/replay through the filesystem") {
    std::string out = temp_dir("run");
    int rc = run(scenario_path("happy_path_3_2.json"), out, std::nullopt,
                 std::nullopt);
    CHECK(rc == 0);
    for (const char* f : {"config.json", "ledger.jsonl", "transcript.jsonl",
                          "store.json", "wallets.json", "actors_state.json",
                          "audit.json", "report.txt"}) {
        CAPTURE(f);
        CHECK(fs::exists(fs::path(out) / f));
    }

    CHECK(audit_cli(out) == 0);

    ReplayVerdict verdict = replay_dir(out);
    CHECK(verdict.identical);

    // a different seed diverges at the very first record
    std::string cfg = slurp(out + "/config.json");
    cfg.replace(cfg.find("\"seed\": 42"), 10, "\"seed\": 43");
    std::ofstream(out + "/config.json") << cfg;
    ReplayVerdict diverged = replay_dir(out);
    CHECK_FALSE(diverged.identical);
    CHECK(diverged.diverged_seq == 0);
}

TEST_CASE("truncated ledger exports fail chain verification on replay") {
    std::string out = temp_dir("trunc");
    REQUIRE(run(scenario_path("happy_path_3_2.json"), out, std::nullopt,
                std::nullopt) == 0);
    std::string text = slurp(out + "/ledger.jsonl");
    std::ofstream(out + "/ledger.jsonl") << text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(replay_dir(out), Error);
}

TEST_CASE("no wallet private key leaks into ledger export or audit report") {
    std::string out = temp_dir("privscan");
    REQUIRE(run(scenario_path("happy_path_3_2.json"), out, std::nullopt,
                std::nullopt) == 0);
    std::string ledger_text = slurp(out + "/ledger.jsonl");
    std::string audit_text = slurp(out + "/audit.json");
    std::string report_text = slurp(out + "/report.txt");
    std::string transcript_text = slurp(out + "/transcript.jsonl");

    auto wallets = nlohmann::json::parse(slurp(out + "/wallets.json"));
    int scanned = 0;
    for (const auto& [label, wallet] : wallets.items()) {
        for (const char* field : {"signing_private", "encryption_private"}) {
            std::string key_hex = wallet.at(field).get<std::string>();
            REQUIRE(key_hex.size() >= 64);
            for (const std::string* text :
                 {&ledger_text, &audit_text, &report_text, &transcript_text}) {
                CHECK(text->find(key_hex) == std::string::npos);
            }
            ++scanned;
        }
    }
    CHECK(scanned >= 14);  // 7 actors, two private keys each
}

TEST_CASE("seed and profile overrides are honored by run") {
    std::string out_a = temp_dir("seed_a");
    std::string out_b = temp_dir("seed_b");
    REQUIRE(run(scenario_path("happy_path_3_2.json"), out_a, 777, std::nullopt) == 0);
    REQUIRE(run(scenario_path("happy_path_3_2.json"), out_b, 777, std::nullopt) == 0);
    CHECK(slurp(out_a + "/ledger.jsonl") == slurp(out_b + "/ledger.jsonl"));
}

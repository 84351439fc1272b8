#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ehrdeleg/actors.hpp"

namespace ehrdeleg::scenario {

struct Step {
    std::string op;  // store|delegate|access|revoke|tamper|collude|tick|check
    std::string expect;            // "" = no expectation
    Bytes ehr_payload;             // store (empty = bundled fixture)
    int dr = 0;                    // access / collude
    std::vector<int> notaries;     // access / collude (0-based)
    bool collude_with_dr = false;
    bool collude_with_dc = false;
    uint64_t tick_by = 0;
    std::string name;              // tamper case / check name
    std::optional<size_t> delegation;  // default: latest
    size_t credential = 0;         // revoke
};

struct ScenarioConfig {
    uint64_t seed = 0;
    std::string profile = "production";
    int notaries = 2;
    int drs = 1;
    threshold::ThresholdParams threshold{3, 2};
    std::string mode = "xor";
    uint64_t expiry_ticks = 100;
    uint64_t link_ttl_ticks = 3600;
    std::vector<std::string> availability;
    bool dc_checks_notary_event = true;
    bool audit_expect_reference = false;  // compare audit to the expected matrix
    std::vector<Step> steps;

    void validate() const;  // throws ConfigError
    std::string to_json_text() const;
    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig load_file(const std::string& path);
};

struct StepResult {
    size_t index = 0;
    std::string op;
    std::string outcome;
    std::string expect;
    bool ok = true;
};

enum class Knowledge { no, partial, yes };

std::string knowledge_name(Knowledge k);

struct AuditCell {
    Knowledge computed = Knowledge::no;
    Knowledge expected = Knowledge::no;
    bool pass = true;
};

struct AuditReport {
    std::vector<std::string> items;
    std::vector<std::string> columns;
    // item -> column -> cell
    std::map<std::string, std::map<std::string, AuditCell>> cells;
    std::string transcript_digest;
    std::string ledger_head;
    bool compared = false;
    bool all_pass = true;

    std::string to_json_text() const;
    std::string to_table() const;
};

// Everything the who-knows-what scan needs: per-column retained state plus
// the ground-truth needles. A column may carry several state strings (one
// per participating notary or requester); every one of them must match the
// expected cell — the reference matrix describes each single actor's view.
struct AuditInputs {
    std::map<std::string, std::vector<std::string>> column_state;
    std::string ledger_text;
    std::string transcript_text;
    std::string ledger_head_hex;

    bool have_delegation = false;
    Bytes sk;
    Bytes pseudo_id;
    Bytes ehr_id;
    Bytes masked_key;
    Bytes auth_list_claim;
    std::string do_did;
    std::string dc_did;
    std::vector<std::string> notary_dids;
    std::vector<Bytes> share_keys;
    std::vector<Bytes> link_tokens;
    bool dr_accessed = false;
};

AuditInputs audit_inputs_from_system(actors::System& system);
AuditInputs audit_inputs_from_dir(const std::string& dir);
AuditReport compute_audit(const AuditInputs& inputs, bool compare);

struct ExecutedScenario {
    std::unique_ptr<actors::System> system;
    std::vector<StepResult> steps;
    bool steps_ok = true;
};

ExecutedScenario execute(const ScenarioConfig& config);

// CLI entry points. run writes config/transcript/ledger/store/wallets/
// actors_state/audit/report into out_dir; exit 0 all expectations met,
// 1 expectation or audit failure, 2 invalid config.
int run(const std::string& config_path, const std::string& out_dir,
        std::optional<uint64_t> seed_override,
        std::optional<std::string> profile_override);

int audit_cli(const std::string& dir);

struct ReplayVerdict {
    bool identical = false;
    int64_t diverged_seq = -1;
    std::string detail;
};

ReplayVerdict replay_dir(const std::string& dir);
int replay_cli(const std::string& dir);

}  // namespace ehrdeleg::scenario

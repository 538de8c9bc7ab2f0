// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CLI_RUNNER_H
#define COVLAB_CLI_RUNNER_H

#include "ajolote/world.h"
#include "cli/scenario.h"

namespace covlab {

struct ScenarioReport {
    int exit_code{0};
    nlohmann::ordered_json json;
    std::string chain_log; // line-delimited JSON {height, event, txid, detail}

    std::string Dump() const { return json.dump(2) + "\n"; }
};

// Executes the scenario deterministically and assembles the report: event
// log, final exposure metrics, per-device state hashes, covenant statuses,
// observer detections, and per-assertion pass/fail. Exit 0 iff every
// assertion passes; parse errors surface before this is called (exit 2).
ScenarioReport RunScenario(const Scenario& scenario,
                           std::optional<uint64_t> seed_override = std::nullopt);

// Convenience wrapper handling file loading and the report output; returns
// the process exit code (0 pass, 1 assertion failure, 2 parse error).
// `chain_log_path`, when nonempty, receives the line-delimited chain event
// log.
int RunScenarioFile(const std::string& path, std::optional<uint64_t> seed_override,
                    const std::string& out_path, const std::string& chain_log_path = "");

} // namespace covlab

#endif // COVLAB_CLI_RUNNER_H

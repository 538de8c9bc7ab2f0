// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CLI_SCENARIO_H
#define COVLAB_CLI_SCENARIO_H

#include "ajolote/policies.h"
#include "chainsim/chain.h"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace covlab {

class ScenarioParseError : public std::runtime_error
{
public:
    explicit ScenarioParseError(const std::string& what) : std::runtime_error(what) {}
};

/** One scripted event: a ceremony, an adversary action, or a chain action.
 *  Parameters are carried as raw JSON for per-op interpretation. */
struct ScenarioEvent {
    std::string op;
    nlohmann::json args;
};

struct ScenarioAssertion {
    std::string name;
    std::string check;
    nlohmann::json args;
};

/** A deterministic world description: seed, configuration, scripted events
 *  and named expected outcomes. */
struct Scenario {
    uint64_t seed{0};
    AjoloteConfig config;
    ChainConfig chain;
    bool per_vault_internal_keys{false};
    std::string deletion_method{"destroy"};
    std::vector<ScenarioEvent> script;
    std::vector<ScenarioAssertion> assertions;

    static Scenario FromJson(const nlohmann::json& j);
    static Scenario LoadFile(const std::string& path);
};

} // namespace covlab

#endif // COVLAB_CLI_SCENARIO_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "cli/scenario.h"

#include <fstream>

namespace covlab {

Scenario Scenario::FromJson(const nlohmann::json& j)
{
    Scenario s;
    if (!j.contains("seed")) throw ScenarioParseError("scenario requires a seed");
    s.seed = j.at("seed").get<uint64_t>();
    if (j.contains("config")) s.config = AjoloteConfig::FromJson(j.at("config"));
    if (j.contains("chain")) {
        const auto& c = j.at("chain");
        s.chain.min_relay_feerate = c.value("min_relay_feerate", uint64_t{1});
        s.chain.block_size_limit = c.value("block_size_limit", size_t{100000});
        s.chain.ctv_enabled = c.value("ctv_enabled", false);
        s.chain.inspect_enabled = c.value("inspect_enabled", false);
    }
    s.per_vault_internal_keys = j.value("per_vault_internal_keys", false);
    s.deletion_method = j.value("deletion_method", std::string("destroy"));
    if (j.contains("script")) {
        for (const auto& e : j.at("script")) {
            ScenarioEvent ev;
            ev.op = e.at("op").get<std::string>();
            ev.args = e;
            s.script.push_back(std::move(ev));
        }
    }
    if (j.contains("assertions")) {
        for (const auto& a : j.at("assertions")) {
            ScenarioAssertion sa;
            sa.name = a.at("name").get<std::string>();
            sa.check = a.at("check").get<std::string>();
            sa.args = a;
            s.assertions.push_back(std::move(sa));
        }
    }
    return s;
}

Scenario Scenario::LoadFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ScenarioParseError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioParseError(std::string("scenario is not valid JSON: ") + e.what());
    }
    try {
        return FromJson(j);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioParseError(std::string("scenario schema error: ") + e.what());
    }
}

} // namespace covlab

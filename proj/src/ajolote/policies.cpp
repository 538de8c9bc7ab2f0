// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/policies.h"

namespace covlab {

nlohmann::ordered_json WithdrawalConstraints::ToJson() const
{
    nlohmann::ordered_json j;
    j["max_withdrawals_per_window"] = max_withdrawals_per_window;
    j["window_blocks"] = window_blocks;
    j["max_value_per_window"] = max_value_per_window;
    j["phase_period"] = phase_period;
    j["phase_lo"] = phase_lo;
    j["phase_hi"] = phase_hi;
    return j;
}

WithdrawalConstraints WithdrawalConstraints::FromJson(const nlohmann::json& j)
{
    WithdrawalConstraints w;
    w.max_withdrawals_per_window = j.value("max_withdrawals_per_window", 0u);
    w.window_blocks = j.value("window_blocks", 0u);
    w.max_value_per_window = j.value("max_value_per_window", uint64_t{0});
    w.phase_period = j.value("phase_period", 0u);
    w.phase_lo = j.value("phase_lo", 0u);
    w.phase_hi = j.value("phase_hi", 0u);
    return w;
}

Bytes AjoloteConfig::SerializeForHash() const
{
    Bytes out;
    AppendU32(out, timelock);
    AppendU64(out, v_min);
    AppendU64(out, v_max);
    AppendU32(out, watchtowers);
    return out;
}

nlohmann::ordered_json AjoloteConfig::ToJson() const
{
    nlohmann::ordered_json j;
    j["T"] = timelock;
    j["V_min"] = v_min;
    j["V_max"] = v_max;
    j["N"] = watchtowers;
    j["w"] = w.ToJson();
    return j;
}

AjoloteConfig AjoloteConfig::FromJson(const nlohmann::json& j)
{
    AjoloteConfig c;
    c.timelock = j.value("T", 6u);
    c.v_min = j.value("V_min", uint64_t{10000});
    c.v_max = j.value("V_max", uint64_t{100000});
    c.watchtowers = j.value("N", 2u);
    if (j.contains("w")) c.w = WithdrawalConstraints::FromJson(j.at("w"));
    return c;
}

ExtendedKey DeriveOutputKey(const ExtendedKey& account, KeyBranch branch, uint32_t cursor)
{
    return account.DeriveChild(static_cast<uint32_t>(branch), false).DeriveChild(cursor, false);
}

AjolotePolicies BuildPolicies(const std::vector<ExtendedKey>& signer_accounts,
                              const std::vector<ExtendedKey>& watchtower_accounts,
                              uint32_t cursor_h, uint32_t cursor_j,
                              const std::optional<GroupPoint>& e1,
                              const std::optional<GroupPoint>& e2)
{
    if (signer_accounts.size() != SIGNER_COUNT) {
        throw IncompleteSetup("need all 5 signer accounts, have " +
                              std::to_string(signer_accounts.size()));
    }
    if (watchtower_accounts.empty()) throw IncompleteSetup("need at least one watchtower account");

    AjolotePolicies out;
    auto name = [](const char* prefix, size_t i) { return std::string(prefix) + std::to_string(i); };

    std::vector<Policy> receive_keys, wit_keys, spend_keys, payfb_keys, fb_keys, test_keys;
    for (size_t n = 1; n <= SIGNER_COUNT; ++n) {
        const ExtendedKey& account = signer_accounts[n - 1];
        if (n <= 3) {
            std::string r = name("R", n);
            out.keys[r] = DeriveOutputKey(account, KeyBranch::Receive, cursor_h).PublicKey();
            receive_keys.push_back(Policy::Pk(r));
        }
        std::string v = name("V", n);
        out.keys[v] = DeriveOutputKey(account, KeyBranch::Withdraw, cursor_j).PublicKey();
        wit_keys.push_back(Policy::Pk(v));
        std::string u = name("U", n);
        out.keys[u] = DeriveOutputKey(account, KeyBranch::Unvault, cursor_j).PublicKey();
        payfb_keys.push_back(Policy::Pk(u));
        if (n <= 3) spend_keys.push_back(Policy::Pk(u));
        std::string f = name("F", n);
        out.keys[f] = DeriveOutputKey(account, KeyBranch::Fallback, cursor_j).PublicKey();
        fb_keys.push_back(Policy::Pk(f));
        std::string a = name("A", n);
        out.keys[a] = account.PublicKey();
        test_keys.push_back(Policy::Pk(a));
    }
    for (size_t k = 1; k <= watchtower_accounts.size(); ++k) {
        std::string w = name("W", k);
        out.keys[w] =
            watchtower_accounts[k - 1].DeriveChild(cursor_j, false).PublicKey();
        payfb_keys.push_back(Policy::Pk(w));
        std::string wa = name("WA", k);
        out.keys[wa] = watchtower_accounts[k - 1].PublicKey();
        test_keys.push_back(Policy::Pk(wa));
    }

    out.l_receive = Policy::Thresh(2, receive_keys);
    out.l_wit = Policy::Thresh(2, wit_keys);
    out.l_pay_to_fb = Policy::Thresh(1, payfb_keys);
    out.l_spend = Policy::Thresh(2, spend_keys);
    out.l_fb = Policy::Thresh(3, fb_keys);
    out.l_test =
        Policy::Thresh(static_cast<uint32_t>(SIGNER_COUNT + watchtower_accounts.size()), test_keys);

    if (e1 && e2) {
        out.keys["E1"] = *e1;
        out.keys["E2"] = *e2;
        out.l_enf = Policy::And(Policy::Pk("E1"), Policy::Pk("E2"));
    } else {
        // Placeholder until a vault instance supplies the ephemeral pair.
        out.l_enf = Policy::And(Policy::Pk("E1"), Policy::Pk("E2"));
    }
    return out;
}

AjolotePolicies PoliciesFromKeys(const KeyMap& keys)
{
    size_t watchtowers = 0;
    while (keys.count("W" + std::to_string(watchtowers + 1))) ++watchtowers;
    if (watchtowers == 0) throw IncompleteSetup("key map has no watchtower entries");

    AjolotePolicies out;
    out.keys = keys;
    std::vector<Policy> receive_keys, wit_keys, spend_keys, payfb_keys, fb_keys, test_keys;
    for (size_t n = 1; n <= SIGNER_COUNT; ++n) {
        std::string i = std::to_string(n);
        if (n <= 3) {
            receive_keys.push_back(Policy::Pk("R" + i));
            spend_keys.push_back(Policy::Pk("U" + i));
        }
        wit_keys.push_back(Policy::Pk("V" + i));
        payfb_keys.push_back(Policy::Pk("U" + i));
        fb_keys.push_back(Policy::Pk("F" + i));
        test_keys.push_back(Policy::Pk("A" + i));
    }
    for (size_t k = 1; k <= watchtowers; ++k) {
        payfb_keys.push_back(Policy::Pk("W" + std::to_string(k)));
        test_keys.push_back(Policy::Pk("WA" + std::to_string(k)));
    }
    out.l_receive = Policy::Thresh(2, receive_keys);
    out.l_wit = Policy::Thresh(2, wit_keys);
    out.l_pay_to_fb = Policy::Thresh(1, payfb_keys);
    out.l_spend = Policy::Thresh(2, spend_keys);
    out.l_fb = Policy::Thresh(3, fb_keys);
    if (keys.count("A1") && keys.count("WA1")) {
        out.l_test = Policy::Thresh(static_cast<uint32_t>(SIGNER_COUNT + watchtowers), test_keys);
    } else {
        out.l_test = Policy::Thresh(1, {Policy::Pk("A1")});
    }
    out.l_enf = Policy::And(Policy::Pk("E1"), Policy::Pk("E2"));
    return out;
}

} // namespace covlab

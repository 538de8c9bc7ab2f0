// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_POLICIES_H
#define COVLAB_AJOLOTE_POLICIES_H

#include "crypto/hd.h"
#include "script/policy.h"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace covlab {

class IncompleteSetup : public std::runtime_error
{
public:
    explicit IncompleteSetup(const std::string& what) : std::runtime_error(what) {}
};

/** Rate limits and permitted transacting phases for withdrawals. */
struct WithdrawalConstraints {
    uint32_t max_withdrawals_per_window{0}; // 0 = unlimited
    uint32_t window_blocks{0};
    uint64_t max_value_per_window{0};       // satoshis; 0 = unlimited
    // Heights h with lo <= h % period < hi are permitted; period 0 = always.
    uint32_t phase_period{0};
    uint32_t phase_lo{0};
    uint32_t phase_hi{0};

    bool PhaseAllowed(uint64_t height) const
    {
        if (phase_period == 0) return true;
        uint64_t phase = height % phase_period;
        return phase >= phase_lo && phase < phase_hi;
    }

    bool operator==(const WithdrawalConstraints&) const = default;

    nlohmann::ordered_json ToJson() const;
    static WithdrawalConstraints FromJson(const nlohmann::json& j);
};

/** Configuration c = {T, V_min, V_max, N} plus the withdrawal constraints. */
struct AjoloteConfig {
    uint32_t timelock{6};        // T
    uint64_t v_min{10000};       // V_min
    uint64_t v_max{100000};      // V_max
    uint32_t watchtowers{2};     // N
    WithdrawalConstraints w;

    bool operator==(const AjoloteConfig&) const = default;

    Bytes SerializeForHash() const;
    nlohmann::ordered_json ToJson() const;
    static AjoloteConfig FromJson(const nlohmann::json& j);
};

// Signer indices: 1 mobile, 2 home, 3 office, 4 bank A, 5 bank B.
constexpr size_t SIGNER_COUNT = 5;

// Derivation branches under an account for each output type's keys.
enum class KeyBranch : uint32_t { Receive = 0, Withdraw = 1, Unvault = 2, Fallback = 3 };

// Non-hardened child at (branch, cursor) under the given account.
ExtendedKey DeriveOutputKey(const ExtendedKey& account, KeyBranch branch, uint32_t cursor);

/** The concrete policy set for one cursor position, with its key map. */
struct AjolotePolicies {
    Policy l_receive;   // thresh(2, R1..R3)
    Policy l_wit;       // thresh(2, V1..V5)
    Policy l_enf;       // and(E1, E2)
    Policy l_pay_to_fb; // thresh(1, U1..U5, W1..WN)
    Policy l_spend;     // thresh(2, U1..U3)
    Policy l_fb;        // thresh(3, F1..F5)
    Policy l_test;      // thresh(5+N, A1..A5, W1..WN)
    KeyMap keys;
};

// Builds the policy set from the five signer accounts and N watchtower
// accounts at cursors (h for receive keys, j for the rest). Enforcement keys
// are the per-vault ephemeral pair. Throws IncompleteSetup on missing
// accounts.
AjolotePolicies BuildPolicies(const std::vector<ExtendedKey>& signer_accounts,
                              const std::vector<ExtendedKey>& watchtower_accounts,
                              uint32_t cursor_h, uint32_t cursor_j,
                              const std::optional<GroupPoint>& e1,
                              const std::optional<GroupPoint>& e2);

// Rebuilds the policy structures over an existing key map (the snapshot a
// vault or coin record carries). The watchtower count is read off the W<k>
// entries.
AjolotePolicies PoliciesFromKeys(const KeyMap& keys);

} // namespace covlab

#endif // COVLAB_AJOLOTE_POLICIES_H

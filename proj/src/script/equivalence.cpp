// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "script/equivalence.h"

#include <set>

namespace covlab {

bool VerifyTreeEquivalence(const std::vector<Policy>& leaf_policies, const Policy& top_policy)
{
    std::vector<std::string> keys = top_policy.Keys();
    std::set<std::string> seen(keys.begin(), keys.end());
    for (const Policy& leaf : leaf_policies) {
        for (const std::string& k : leaf.Keys()) {
            if (seen.insert(k).second) keys.push_back(k);
        }
    }
    if (keys.size() > 16) throw TooLarge(keys.size());

    const size_t n = keys.size();
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::set<std::string> signers;
        for (size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) signers.insert(keys[i]);
        }
        for (bool lock_expired : {false, true}) {
            bool top = top_policy.Satisfied(signers, lock_expired);
            bool any_leaf = false;
            for (const Policy& leaf : leaf_policies) {
                if (leaf.Satisfied(signers, lock_expired)) {
                    any_leaf = true;
                    break;
                }
            }
            if (top != any_leaf) return false;
        }
    }
    return true;
}

} // namespace covlab

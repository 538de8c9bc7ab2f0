// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_COINCONTROL_H
#define COVLAB_AJOLOTE_COINCONTROL_H

#include "ajolote/policies.h"

#include <stdexcept>
#include <vector>

namespace covlab {

class Insufficient : public std::runtime_error
{
public:
    Insufficient() : std::runtime_error("selection target exceeds the available balance") {}
};

/** Vault creation: partitions a balance into amounts within [V_min, V_max],
 *  greedy largest-first; a remainder below V_min stays as a receive output. */
struct CreatedVaults {
    std::vector<uint64_t> amounts;
    uint64_t residual{0};
};
CreatedVaults CoinControlCreate(uint64_t balance, const AjoloteConfig& cfg);

/** Vault selection: the fewest vaults covering target+fees, lowest excess as
 *  the tiebreak. */
struct VaultCoin {
    uint64_t id{0};
    uint64_t amount{0};
};
struct Selection {
    std::vector<uint64_t> ids;
    uint64_t covered{0};
    uint64_t change{0}; // covered - target - fees
};
Selection CoinControlSelect(const std::vector<VaultCoin>& vaults, uint64_t target, uint64_t fees);

} // namespace covlab

#endif // COVLAB_AJOLOTE_COINCONTROL_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/coincontrol.h"

#include <algorithm>

namespace covlab {

CreatedVaults CoinControlCreate(uint64_t balance, const AjoloteConfig& cfg)
{
    CreatedVaults out;
    uint64_t remaining = balance;
    while (remaining >= cfg.v_max) {
        out.amounts.push_back(cfg.v_max);
        remaining -= cfg.v_max;
    }
    if (remaining >= cfg.v_min) {
        out.amounts.push_back(remaining);
        remaining = 0;
    }
    out.residual = remaining;
    return out;
}

Selection CoinControlSelect(const std::vector<VaultCoin>& vaults, uint64_t target, uint64_t fees)
{
    uint64_t total = 0;
    for (const VaultCoin& v : vaults) total += v.amount;
    uint64_t need = target + fees;
    if (need > total) throw Insufficient();

    std::vector<VaultCoin> sorted = vaults;
    std::sort(sorted.begin(), sorted.end(), [](const VaultCoin& a, const VaultCoin& b) {
        if (a.amount != b.amount) return a.amount > b.amount;
        return a.id < b.id;
    });

    // Fewest vaults first; among selections of that size, lowest excess.
    // Exhaustive for small counts, with a greedy fallback beyond the bound.
    const size_t n = sorted.size();
    for (size_t count = 1; count <= n; ++count) {
        if (count <= 4 && n <= 24) {
            std::vector<size_t> best;
            uint64_t best_sum = 0;
            std::vector<size_t> pick(count);
            auto recurse = [&](auto&& self, size_t start, size_t depth, uint64_t sum) -> void {
                if (depth == count) {
                    if (sum >= need && (best.empty() || sum < best_sum)) {
                        best = pick;
                        best_sum = sum;
                    }
                    return;
                }
                for (size_t i = start; i < n; ++i) {
                    pick[depth] = i;
                    self(self, i + 1, depth + 1, sum + sorted[i].amount);
                }
            };
            recurse(recurse, 0, 0, 0);
            if (!best.empty()) {
                Selection sel;
                for (size_t i : best) sel.ids.push_back(sorted[i].id);
                sel.covered = best_sum;
                sel.change = best_sum - need;
                return sel;
            }
        } else {
            // Greedy: largest-first until covered.
            Selection sel;
            uint64_t sum = 0;
            for (size_t i = 0; i < n && sum < need; ++i) {
                sel.ids.push_back(sorted[i].id);
                sum += sorted[i].amount;
            }
            if (sum >= need) {
                sel.covered = sum;
                sel.change = sum - need;
                return sel;
            }
        }
    }
    throw Insufficient();
}

} // namespace covlab

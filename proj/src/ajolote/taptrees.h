// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_TAPTREES_H
#define COVLAB_AJOLOTE_TAPTREES_H

#include "ajolote/policies.h"
#include "taproot/taptree.h"

namespace covlab {

enum class AjoloteOutputType { Receive, Vault, Unvault, Fallback, Test };

std::string OutputTypeName(AjoloteOutputType t);

/** A built tree with the policy material needed for equivalence checks and
 *  witness construction. */
struct BuiltTree {
    TapTree tree;
    std::vector<Policy> leaf_policies;
    Policy top_policy;
    GroupPoint internal_key;
    TaprootOutput output;
    Bytes script; // P2TR public key script

    TapLeaf LeafFor(size_t index, const KeyMap& keys) const;
};

// Trees per output type. The receive tree's right leaf uses the corrected
// 2-of-3 policy so the leaf disjunction equals l_receive; the literal-table
// variant (3-of-3) is exposed separately for the documented discrepancy test.
BuiltTree BuildReceiveTree(const AjolotePolicies& p,
                           const std::optional<GroupPoint>& internal_key = std::nullopt);
BuiltTree BuildReceiveTreeLiteralTable(const AjolotePolicies& p);
BuiltTree BuildVaultTree(const AjolotePolicies& p,
                         const std::optional<GroupPoint>& internal_key = std::nullopt);
// Left spine of the two time-locked leaves, then a right-descending comb of
// the 5+N enforcement leaves; the deepest path has length N+5.
BuiltTree BuildUnvaultTree(const AjolotePolicies& p, uint32_t timelock, uint32_t watchtowers,
                           const std::optional<GroupPoint>& internal_key = std::nullopt);
BuiltTree BuildFallbackTree(const AjolotePolicies& p,
                            const std::optional<GroupPoint>& internal_key = std::nullopt);
BuiltTree BuildTestTree(const AjolotePolicies& p);

// Optional per-vault internal key: P' = P + rG with r derived from the vault
// index and the setup hash (no known discrete log for P').
GroupPoint PerVaultInternalKey(uint64_t vault_index, const Bytes32& setup_hash);

} // namespace covlab

#endif // COVLAB_AJOLOTE_TAPTREES_H

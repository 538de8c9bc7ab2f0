// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/taptrees.h"

#include "crypto/hash.h"
#include "script/compiler.h"
#include "txmodel/transaction.h"

namespace covlab {

namespace {

BuiltTree Assemble(std::vector<Policy> leaf_policies, Policy top, const KeyMap& keys,
                   const std::optional<GroupPoint>& internal_key,
                   std::function<TapTree(std::vector<TapTree>)> shape)
{
    BuiltTree out;
    out.leaf_policies = std::move(leaf_policies);
    out.top_policy = std::move(top);
    std::vector<TapTree> leaves;
    for (const Policy& p : out.leaf_policies) {
        leaves.push_back(TapTree::Leaf(Compile(p, keys)));
    }
    out.tree = shape(std::move(leaves));
    out.internal_key = internal_key.value_or(NumsInternalKey());
    out.output = OutputKey(out.internal_key, out.tree);
    out.script = TaprootScript(out.output.XOnly());
    return out;
}

TapTree PairShape(std::vector<TapTree> leaves)
{
    return TapTree::Branch(std::move(leaves[0]), std::move(leaves[1]));
}

} // namespace

std::string OutputTypeName(AjoloteOutputType t)
{
    switch (t) {
    case AjoloteOutputType::Receive: return "receive";
    case AjoloteOutputType::Vault: return "vault";
    case AjoloteOutputType::Unvault: return "unvault";
    case AjoloteOutputType::Fallback: return "fallback";
    case AjoloteOutputType::Test: return "test";
    }
    return "?";
}

TapLeaf BuiltTree::LeafFor(size_t index, const KeyMap& keys) const
{
    TapLeaf leaf;
    leaf.script = Compile(leaf_policies.at(index), keys);
    return leaf;
}

BuiltTree BuildReceiveTree(const AjolotePolicies& p, const std::optional<GroupPoint>& internal_key)
{
    Policy left = Policy::Parse("and(pk(R1),pk(R2))");
    Policy right = Policy::Parse("thresh(2,pk(R1),pk(R2),pk(R3))");
    return Assemble({left, right}, p.l_receive, p.keys, internal_key, PairShape);
}

BuiltTree BuildReceiveTreeLiteralTable(const AjolotePolicies& p)
{
    Policy left = Policy::Parse("and(pk(R1),pk(R2))");
    Policy right = Policy::Parse("thresh(3,pk(R1),pk(R2),pk(R3))");
    return Assemble({left, right}, p.l_receive, p.keys, std::nullopt, PairShape);
}

BuiltTree BuildVaultTree(const AjolotePolicies& p, const std::optional<GroupPoint>& internal_key)
{
    Policy left = Policy::Parse("thresh(4,pk(V1),pk(V2),pk(E1),pk(E2))");
    Policy right = Policy::Parse(
        "and(and(pk(E1),pk(E2)),thresh(2,pk(V1),pk(V2),pk(V3),pk(V4),pk(V5)))");
    Policy top = Policy::And(p.l_wit, p.l_enf);
    return Assemble({left, right}, top, p.keys, internal_key, PairShape);
}

BuiltTree BuildUnvaultTree(const AjolotePolicies& p, uint32_t timelock, uint32_t watchtowers,
                           const std::optional<GroupPoint>& internal_key)
{
    std::vector<Policy> leaves;
    std::string t = std::to_string(timelock);
    leaves.push_back(Policy::Parse("and(thresh(2,pk(U1),pk(U2)),older(" + t + "))"));
    leaves.push_back(Policy::Parse("and(thresh(2,pk(U1),pk(U2),pk(U3)),older(" + t + "))"));
    for (size_t n = 1; n <= SIGNER_COUNT; ++n) {
        leaves.push_back(
            Policy::Parse("thresh(3,pk(E1),pk(E2),pk(U" + std::to_string(n) + "))"));
    }
    for (size_t k = 1; k <= watchtowers; ++k) {
        leaves.push_back(
            Policy::Parse("thresh(3,pk(E1),pk(E2),pk(W" + std::to_string(k) + "))"));
    }
    Policy top = Policy::Or(Policy::And(p.l_spend, Policy::Older(timelock)),
                            Policy::And(p.l_pay_to_fb, p.l_enf));

    auto shape = [](std::vector<TapTree> built) {
        // Two time-locked leaves at depth 2; enforcement leaves as a
        // right-descending comb so the deepest path has length N+5.
        TapTree spend_branch = TapTree::Branch(std::move(built[0]), std::move(built[1]));
        TapTree comb = std::move(built.back());
        for (size_t i = built.size() - 1; i-- > 2;) {
            comb = TapTree::Branch(std::move(built[i]), std::move(comb));
        }
        return TapTree::Branch(std::move(spend_branch), std::move(comb));
    };
    return Assemble(std::move(leaves), top, p.keys, internal_key, shape);
}

BuiltTree BuildFallbackTree(const AjolotePolicies& p, const std::optional<GroupPoint>& internal_key)
{
    Policy left = Policy::Parse("thresh(3,pk(F1),pk(F2),pk(F3))");
    Policy right = Policy::Parse("thresh(3,pk(F1),pk(F2),pk(F3),pk(F4),pk(F5))");
    return Assemble({left, right}, p.l_fb, p.keys, internal_key, PairShape);
}

BuiltTree BuildTestTree(const AjolotePolicies& p)
{
    BuiltTree out;
    out.leaf_policies = {p.l_test};
    out.top_policy = p.l_test;
    out.tree = TapTree::Leaf(Compile(p.l_test, p.keys));
    out.internal_key = NumsInternalKey();
    out.output = OutputKey(out.internal_key, out.tree);
    out.script = TaprootScript(out.output.XOnly());
    return out;
}

GroupPoint PerVaultInternalKey(uint64_t vault_index, const Bytes32& setup_hash)
{
    Bytes32 r = TaggedHashWriter("covlab/internal-key-randomizer")
                    .WriteU64(vault_index)
                    .Write(setup_hash)
                    .Finalize();
    return TweakKey(NumsInternalKey(), Scalar::FromBytes(r));
}

} // namespace covlab

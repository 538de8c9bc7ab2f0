// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include "crypto/hash.h"
#include "taproot/taptree.h"
#include "testutil.h"

#include <algorithm>
#include <cstring>

using namespace covlab;

namespace {

TapLeaf LeafFor(uint8_t marker)
{
    KeyPair kp = KeypairGen(TaggedHash("covlab/test-taproot-key", {marker}));
    ScriptProgram prog;
    prog.instructions.push_back(Instruction::MakePushKey(kp.pub));
    prog.instructions.push_back(Instruction::Simple(Opcode::CheckSig));
    TapLeaf leaf;
    leaf.script = prog;
    return leaf;
}

Bytes32 ManualBranch(const Bytes32& a, const Bytes32& b)
{
    TaggedHashWriter w("TapBranch");
    if (std::memcmp(a.data(), b.data(), 32) <= 0) {
        w.Write(a).Write(b);
    } else {
        w.Write(b).Write(a);
    }
    return w.Finalize();
}

bool Contains(const Bytes& haystack, const Bytes& needle)
{
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
           haystack.end();
}

} // namespace

TEST_CASE("merkle root conventions")
{
    TapLeaf a = LeafFor(1), b = LeafFor(2), c = LeafFor(3);

    // Single leaf: root equals the leaf hash.
    CHECK(TapTree::Leaf(a).MerkleRoot() == a.Hash());

    // ((A,B),C) recomputed by hand with the tagged-hash oracle.
    TapTree tree = TapTree::Branch(TapTree::Branch(TapTree::Leaf(a), TapTree::Leaf(b)),
                                   TapTree::Leaf(c));
    Bytes32 expect = ManualBranch(ManualBranch(a.Hash(), b.Hash()), c.Hash());
    CHECK(tree.MerkleRoot() == expect);

    // Swapping children leaves the root unchanged.
    TapTree swapped = TapTree::Branch(TapTree::Leaf(c),
                                      TapTree::Branch(TapTree::Leaf(b), TapTree::Leaf(a)));
    CHECK(swapped.MerkleRoot() == tree.MerkleRoot());
}

TEST_CASE("output keys bind the tree and follow the tweak relation")
{
    TapLeaf a = LeafFor(4), b = LeafFor(5);
    TapTree t1 = TapTree::Branch(TapTree::Leaf(a), TapTree::Leaf(b));
    TapTree t2 = TapTree::Leaf(a);
    const GroupPoint& p = NumsInternalKey();

    TaprootOutput q1 = OutputKey(p, t1);
    TaprootOutput q2 = OutputKey(p, t1);
    CHECK(q1.output_key == q2.output_key);
    CHECK(OutputKey(p, t2).output_key != q1.output_key);

    // Independent tweak-oracle recomputation via the crypto module.
    Bytes32 t = TaggedHashWriter("TapTweak").Write(p.ToBytes()).Write(t1.MerkleRoot()).Finalize();
    CHECK(TweakKey(p, Scalar::FromBytes(t)) == q1.output_key);
}

TEST_CASE("nums internal key has no usable key path")
{
    const GroupPoint& nums = NumsInternalKey();
    CHECK(nums == NumsInternalKey());
    CHECK(!nums.IsIdentity());
    auto decoded = GroupPoint::FromBytes(nums.ToBytes());
    REQUIRE(decoded.has_value());
    CHECK(*decoded == nums);
    // Signatures under any stored scalar never verify against it.
    Bytes32 msg = TaggedHash("covlab/test-msg", {7});
    for (uint8_t i = 1; i < 6; ++i) {
        KeyPair kp = KeypairGen(TaggedHash("covlab/test-nums", {i}));
        CHECK(!Verify(nums, msg, Sign(kp.priv, msg)));
    }
}

TEST_CASE("inclusion proofs round-trip for every leaf")
{
    std::vector<TapLeaf> leaves;
    for (uint8_t i = 10; i < 17; ++i) leaves.push_back(LeafFor(i));

    // Right-descending comb.
    TapTree tree = TapTree::Leaf(leaves.back());
    for (size_t i = leaves.size() - 1; i-- > 0;) {
        tree = TapTree::Branch(TapTree::Leaf(leaves[i]), tree);
    }
    const GroupPoint& p = NumsInternalKey();
    TaprootOutput out = OutputKey(p, tree);

    for (const TapLeaf& leaf : leaves) {
        ControlBlock cb = ProveInclusion(tree, leaf, p);
        CHECK(VerifyControlBlock(out.XOnly(), leaf, cb));
        // Tampering any path element breaks the proof.
        if (!cb.path.empty()) {
            ControlBlock bad = cb;
            bad.path[0][4] ^= 1;
            CHECK(!VerifyControlBlock(out.XOnly(), leaf, bad));
        }
        // Control block serialization round-trips.
        auto parsed = ControlBlock::Parse(cb.Serialize());
        REQUIRE(parsed.has_value());
        CHECK(VerifyControlBlock(out.XOnly(), leaf, *parsed));
    }

    // Comb depths: first leaf at depth 1, deepest at leaves-1.
    CHECK(tree.LeafDepth(leaves[0]) == 1);
    CHECK(tree.LeafDepth(leaves.back()) == leaves.size() - 1);

    TapLeaf absent = LeafFor(99);
    CHECK_THROWS_AS(ProveInclusion(tree, absent, p), NotALeaf);
}

TEST_CASE("control blocks reveal sibling hashes, never sibling scripts")
{
    TapLeaf a = LeafFor(20), b = LeafFor(21), c = LeafFor(22);
    TapTree tree = TapTree::Branch(TapTree::Branch(TapTree::Leaf(a), TapTree::Leaf(b)),
                                   TapTree::Leaf(c));
    ControlBlock cb = ProveInclusion(tree, a, NumsInternalKey());
    Bytes ser = cb.Serialize();
    CHECK(!Contains(ser, b.script.Serialize()));
    CHECK(!Contains(ser, c.script.Serialize()));
}

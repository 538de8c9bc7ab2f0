// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "taproot/taptree.h"

#include <cstring>

namespace covlab {

namespace {

Bytes32 BranchHash(const Bytes32& a, const Bytes32& b)
{
    TaggedHashWriter w("TapBranch");
    if (std::memcmp(a.data(), b.data(), 32) <= 0) {
        w.Write(a).Write(b);
    } else {
        w.Write(b).Write(a);
    }
    return w.Finalize();
}

Bytes32 TweakHash(const GroupPoint& internal_key, const Bytes32& merkle_root)
{
    return TaggedHashWriter("TapTweak").Write(internal_key.ToBytes()).Write(merkle_root).Finalize();
}

} // namespace

Bytes32 TapLeaf::Hash() const
{
    Bytes ser = script.Serialize();
    return TaggedHashWriter("TapLeaf")
        .WriteU8(version)
        .WriteU32(static_cast<uint32_t>(ser.size()))
        .Write(ser)
        .Finalize();
}

Bytes ControlBlock::Serialize() const
{
    Bytes out = internal_key.ToBytes();
    for (const Bytes32& h : path) Append(out, h);
    return out;
}

std::optional<ControlBlock> ControlBlock::Parse(const Bytes& data)
{
    if (data.size() < 33 || (data.size() - 33) % 32 != 0) return std::nullopt;
    size_t n = (data.size() - 33) / 32;
    if (n > MAX_CONTROL_PATH) return std::nullopt;
    auto key = GroupPoint::FromBytes(Bytes(data.begin(), data.begin() + 33));
    if (!key) return std::nullopt;
    ControlBlock cb;
    cb.internal_key = *key;
    for (size_t i = 0; i < n; ++i) {
        Bytes32 h;
        std::memcpy(h.data(), data.data() + 33 + 32 * i, 32);
        cb.path.push_back(h);
    }
    return cb;
}

TapTree TapTree::Leaf(TapLeaf leaf)
{
    TapTree t;
    auto node = std::make_shared<Node>();
    node->hash = leaf.Hash();
    node->leaf = std::move(leaf);
    t.m_root = std::move(node);
    return t;
}

TapTree TapTree::Leaf(ScriptProgram script)
{
    TapLeaf l;
    l.script = std::move(script);
    return Leaf(std::move(l));
}

TapTree TapTree::Branch(TapTree left, TapTree right)
{
    if (!left.m_root || !right.m_root) throw std::logic_error("branch of empty tree");
    TapTree t;
    auto node = std::make_shared<Node>();
    node->left = left.m_root;
    node->right = right.m_root;
    node->hash = BranchHash(left.m_root->hash, right.m_root->hash);
    t.m_root = std::move(node);
    return t;
}

Bytes32 TapTree::MerkleRoot() const
{
    if (!m_root) throw std::logic_error("empty tree has no root");
    return m_root->hash;
}

std::vector<TapLeaf> TapTree::Leaves() const
{
    std::vector<TapLeaf> out;
    auto visit = [&](auto&& self, const Node& n) -> void {
        if (n.leaf) {
            out.push_back(*n.leaf);
            return;
        }
        self(self, *n.left);
        self(self, *n.right);
    };
    if (m_root) visit(visit, *m_root);
    return out;
}

bool TapTree::FindPath(const Node& node, const Bytes32& leaf_hash, std::vector<Bytes32>& path)
{
    if (node.leaf) return node.hash == leaf_hash;
    if (FindPath(*node.left, leaf_hash, path)) {
        path.push_back(node.right->hash);
        return true;
    }
    if (FindPath(*node.right, leaf_hash, path)) {
        path.push_back(node.left->hash);
        return true;
    }
    return false;
}

std::vector<Bytes32> TapTree::MerklePath(const TapLeaf& leaf) const
{
    std::vector<Bytes32> path;
    if (!m_root || !FindPath(*m_root, leaf.Hash(), path)) throw NotALeaf();
    return path;
}

size_t TapTree::LeafDepth(const TapLeaf& leaf) const { return MerklePath(leaf).size(); }

TaprootOutput OutputKeyFromRoot(const GroupPoint& internal_key, const Bytes32& merkle_root)
{
    Scalar t = Scalar::FromBytes(TweakHash(internal_key, merkle_root));
    GroupPoint q = internal_key.Add(GroupPoint::MulGen(t));
    if (q.IsIdentity()) throw InvalidTweak();
    return TaprootOutput{q};
}

TaprootOutput OutputKey(const GroupPoint& internal_key, const TapTree& tree)
{
    return OutputKeyFromRoot(internal_key, tree.MerkleRoot());
}

const GroupPoint& NumsInternalKey()
{
    static const GroupPoint nums = [] {
        Bytes enc = GroupPoint::Generator().ToBytesUncompressed();
        Bytes32 x = Sha256(enc);
        for (;;) {
            auto p = GroupPoint::LiftX(x);
            if (p) return *p;
            // Increment the candidate x until it lifts onto the curve.
            for (int i = 31; i >= 0; --i) {
                if (++x[i] != 0) break;
            }
        }
    }();
    return nums;
}

ControlBlock ProveInclusion(const TapTree& tree, const TapLeaf& leaf,
                            const GroupPoint& internal_key)
{
    ControlBlock cb;
    cb.internal_key = internal_key;
    cb.path = tree.MerklePath(leaf);
    if (cb.path.size() > MAX_CONTROL_PATH) throw std::logic_error("tree too deep");
    return cb;
}

bool VerifyControlBlock(const Bytes32& output_key_x, const TapLeaf& leaf, const ControlBlock& cb)
{
    if (cb.path.size() > MAX_CONTROL_PATH) return false;
    Bytes32 running = leaf.Hash();
    for (const Bytes32& sibling : cb.path) running = BranchHash(running, sibling);
    Scalar t = Scalar::FromBytes(TweakHash(cb.internal_key, running));
    GroupPoint q = cb.internal_key.Add(GroupPoint::MulGen(t));
    if (q.IsIdentity()) return false;
    return q.XBytes() == output_key_x;
}

} // namespace covlab

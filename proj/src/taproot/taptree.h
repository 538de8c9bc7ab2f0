// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_TAPROOT_TAPTREE_H
#define COVLAB_TAPROOT_TAPTREE_H

#include "crypto/hash.h"
#include "script/compiler.h"

#include <memory>
#include <stdexcept>
#include <vector>

namespace covlab {

class NotALeaf : public std::runtime_error
{
public:
    NotALeaf() : std::runtime_error("script is not a leaf of this tree") {}
};

constexpr uint8_t TAPLEAF_VERSION = 0xC0;
constexpr size_t MAX_CONTROL_PATH = 128;

struct TapLeaf {
    uint8_t version{TAPLEAF_VERSION};
    ScriptProgram script;

    Bytes32 Hash() const;
    bool operator==(const TapLeaf& o) const { return version == o.version && script == o.script; }
};

/** Inclusion proof: the internal key and the sibling hashes from the leaf to
 *  the root. Sorted-pair branch hashing removes the need for side flags. */
struct ControlBlock {
    GroupPoint internal_key;
    std::vector<Bytes32> path;

    Bytes Serialize() const;
    static std::optional<ControlBlock> Parse(const Bytes& data);
};

/** Binary, possibly unbalanced tree of alternative lock scripts. */
class TapTree
{
public:
    static TapTree Leaf(TapLeaf leaf);
    static TapTree Leaf(ScriptProgram script);
    static TapTree Branch(TapTree left, TapTree right);

    // Single-leaf tree root = leaf hash; every branch hashes the sorted pair
    // of its child hashes.
    Bytes32 MerkleRoot() const;

    std::vector<TapLeaf> Leaves() const;
    size_t LeafDepth(const TapLeaf& leaf) const; // throws NotALeaf

    // Sibling hashes along the path from `leaf` to the root.
    std::vector<Bytes32> MerklePath(const TapLeaf& leaf) const; // throws NotALeaf

private:
    struct Node {
        std::optional<TapLeaf> leaf;
        std::shared_ptr<const Node> left, right;
        Bytes32 hash;
    };
    std::shared_ptr<const Node> m_root;

    static bool FindPath(const Node& node, const Bytes32& leaf_hash, std::vector<Bytes32>& path);
};

struct TaprootOutput {
    GroupPoint output_key;

    Bytes32 XOnly() const { return output_key.XBytes(); }
};

// Q = P + int(t)G with t = tagged TapTweak hash over (P, merkle root).
TaprootOutput OutputKey(const GroupPoint& internal_key, const TapTree& tree);
TaprootOutput OutputKeyFromRoot(const GroupPoint& internal_key, const Bytes32& merkle_root);

// Fixed point with no known discrete log, derived by hashing the standard
// uncompressed encoding of the generator to an x coordinate (incrementing
// until a curve point exists).
const GroupPoint& NumsInternalKey();

ControlBlock ProveInclusion(const TapTree& tree, const TapLeaf& leaf,
                            const GroupPoint& internal_key);

// Recomputes the root from the leaf and path, re-derives the tweak and
// checks the output key's x coordinate.
bool VerifyControlBlock(const Bytes32& output_key_x, const TapLeaf& leaf, const ControlBlock& cb);

} // namespace covlab

#endif // COVLAB_TAPROOT_TAPTREE_H

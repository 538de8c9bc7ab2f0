// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_ANALYSIS_ATTACK_TREE_H
#define COVLAB_ANALYSIS_ATTACK_TREE_H

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace covlab {

class BadReference : public std::runtime_error
{
public:
    explicit BadReference(const std::string& id) : std::runtime_error("unresolved tree: " + id) {}
};

class BadParameters : public std::runtime_error
{
public:
    explicit BadParameters(const std::string& what) : std::runtime_error(what) {}
};

class TreeTooLarge : public std::runtime_error
{
public:
    explicit TreeTooLarge(size_t leaves)
        : std::runtime_error("cutset enumeration bound exceeded: " + std::to_string(leaves) +
                             " leaves") {}
};

enum class GateKind { Or, And, Sand };

std::string GateName(GateKind g);

struct LeafAttributes {
    std::optional<double> cost;
    std::optional<double> time;
    std::optional<double> prob;
};

/** Node of an attack tree: OR/AND/SAND gate, basic attack step, or reference
 *  to a shared sub-tree. SAND children are ordered. `times` is a multiplicity
 *  expression (integer literal or parameter name), expanded to tagged AND
 *  copies at instantiation. */
struct AttackNode {
    enum class Kind { Leaf, Gate, Ref };
    Kind kind{Kind::Leaf};
    std::string label;
    GateKind gate{GateKind::Or};
    std::vector<AttackNode> children;
    std::string ref_id;
    std::string times; // empty = once
    LeafAttributes attrs;

    static AttackNode Leaf(std::string label);
    static AttackNode Gate2(GateKind g, std::string label = "");
    static AttackNode Ref(std::string id, std::string times = "");
};

struct AttackTree {
    std::string id;
    std::string title;
    AttackNode root;
    // Linear constraints over the instantiation parameters, e.g. "A+B=N".
    std::vector<std::string> constraints;
};

using TreeLibrary = std::map<std::string, AttackTree>;
using ParamMap = std::map<std::string, int64_t>;

// Evaluates a constraint such as "A+B=N" or "A+B+C=M-K+1" under the
// parameters; throws BadParameters if violated or a name is missing.
void CheckConstraint(const std::string& constraint, const ParamMap& params);

// Fully resolves a tree: parameters substituted, constraints checked,
// references inlined as distinct tagged instances, multiplicities expanded
// into AND gates over tagged copies. The result is acyclic by construction;
// reference cycles throw BadReference.
AttackNode Instantiate(const TreeLibrary& lib, const std::string& id, const ParamMap& params);

// Shallow variant: references stay as pseudo-leaves labelled "ref:<id>#tag"
// (used by the hierarchical enumeration oracle).
AttackNode InstantiateShallow(const TreeLibrary& lib, const std::string& id,
                              const ParamMap& params);

// Expands `(X times)` nodes of an already reference-free tree.
AttackNode ExpandMultiplicity(const AttackNode& node, const ParamMap& params = {});

size_t CountLeaves(const AttackNode& node);
void VisitLeaves(const AttackNode& node, const std::function<void(const AttackNode&)>& f);

// Assigns attributes to every leaf from its base label (instance tags
// stripped).
void AssignAttributes(AttackNode& node,
                      const std::function<LeafAttributes(const std::string&)>& source);

// Removes leaves failing the predicate (outside an attacker profile). A gate
// losing a required child becomes infeasible and is dropped from its parent;
// the root may become infeasible (returned as nullopt).
std::optional<AttackNode> PruneLeaves(const AttackNode& node,
                                      const std::function<bool(const AttackNode&)>& keep);

enum class TreeQuery { MinCost, MaxProbUnderBudget, MinTime };

struct EvalResult {
    bool feasible{false};
    double value{0.0};
    std::vector<std::string> scenario; // leaf labels, SAND order preserved
};

// Bottom-up evaluation: OR picks the best child; AND/SAND sum cost, multiply
// probability; time is max over AND children and the sum over SAND children.
EvalResult EvalTree(const AttackNode& node, TreeQuery query, double budget = 0.0);

/** One minimal attack scenario with its aggregated attributes. */
struct Cutset {
    std::vector<std::string> leaves; // ordered; SAND segments keep order
    double cost{0.0};
    double time{0.0};
    double prob{1.0};
};

// Exact minimal scenarios of a reference-free tree; guarded by the
// 24-leaf enumeration bound (TreeTooLarge beyond it).
std::vector<Cutset> EnumerateCutsets(const AttackNode& node, size_t max_leaves = 24);

} // namespace covlab

#endif // COVLAB_ANALYSIS_ATTACK_TREE_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "analysis/attack_tree.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace covlab {

std::string GateName(GateKind g)
{
    switch (g) {
    case GateKind::Or: return "OR";
    case GateKind::And: return "AND";
    case GateKind::Sand: return "SAND";
    }
    return "?";
}

AttackNode AttackNode::Leaf(std::string label)
{
    AttackNode n;
    n.kind = Kind::Leaf;
    n.label = std::move(label);
    return n;
}

AttackNode AttackNode::Gate2(GateKind g, std::string label)
{
    AttackNode n;
    n.kind = Kind::Gate;
    n.gate = g;
    n.label = std::move(label);
    return n;
}

AttackNode AttackNode::Ref(std::string id, std::string times)
{
    AttackNode n;
    n.kind = Kind::Ref;
    n.ref_id = std::move(id);
    n.times = std::move(times);
    return n;
}

namespace {

// Tiny evaluator for linear expressions over parameters: terms of names and
// integers joined by + and -.
int64_t EvalExpr(const std::string& expr, const ParamMap& params)
{
    int64_t total = 0;
    int sign = 1;
    size_t i = 0;
    auto skip = [&] {
        while (i < expr.size() && expr[i] == ' ') ++i;
    };
    while (i < expr.size()) {
        skip();
        if (i >= expr.size()) break;
        if (expr[i] == '+') {
            sign = 1;
            ++i;
            continue;
        }
        if (expr[i] == '-') {
            sign = -1;
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(expr[i]))) {
            size_t start = i;
            while (i < expr.size() && std::isdigit(static_cast<unsigned char>(expr[i]))) ++i;
            total += sign * std::stoll(expr.substr(start, i - start));
        } else {
            size_t start = i;
            while (i < expr.size() &&
                   (std::isalnum(static_cast<unsigned char>(expr[i])) || expr[i] == '_')) {
                ++i;
            }
            std::string name = expr.substr(start, i - start);
            auto it = params.find(name);
            if (it == params.end()) throw BadParameters("unbound parameter: " + name);
            total += sign * it->second;
        }
        sign = 1;
    }
    return total;
}

int64_t ResolveTimes(const std::string& times, const ParamMap& params)
{
    if (times.empty()) return 1;
    int64_t v = EvalExpr(times, params);
    if (v < 0) throw BadParameters("negative multiplicity: " + times);
    return v;
}

struct InstantiateCtx {
    const TreeLibrary* lib;
    const ParamMap* params;
    bool inline_refs;
    std::set<std::string> in_progress; // cycle guard
    uint64_t instance_counter{0};      // distinct tag per reference instance
};

// A zero multiplicity drops the node from its parent gate.
std::optional<AttackNode> InstantiateNode(InstantiateCtx& ctx, const AttackNode& node,
                                          const std::string& tag);

AttackNode InstantiateRef(InstantiateCtx& ctx, const std::string& id, const std::string& tag)
{
    // Every occurrence is a distinct instance: leaves inside it carry a
    // fresh tag so repeated references never alias.
    std::string instance_tag =
        (tag.empty() ? id : tag + "." + id) + std::to_string(++ctx.instance_counter);
    if (!ctx.inline_refs) {
        return AttackNode::Leaf("ref:" + id + "#" + instance_tag);
    }
    auto it = ctx.lib->find(id);
    if (it == ctx.lib->end()) throw BadReference(id);
    if (ctx.in_progress.count(id)) throw BadReference(id + " (reference cycle)");
    ctx.in_progress.insert(id);
    for (const std::string& c : it->second.constraints) CheckConstraint(c, *ctx.params);
    auto out = InstantiateNode(ctx, it->second.root, instance_tag);
    ctx.in_progress.erase(id);
    if (!out) throw BadParameters("tree " + id + " vanished under the given parameters");
    return *out;
}

std::optional<AttackNode> InstantiateNode(InstantiateCtx& ctx, const AttackNode& node,
                                          const std::string& tag)
{
    int64_t copies = ResolveTimes(node.times, *ctx.params);
    if (copies == 0) return std::nullopt;

    auto one_copy = [&](const std::string& copy_tag) -> AttackNode {
        switch (node.kind) {
        case AttackNode::Kind::Leaf: {
            AttackNode leaf = node;
            leaf.times.clear();
            leaf.label = node.label + (copy_tag.empty() ? "" : "#" + copy_tag);
            return leaf;
        }
        case AttackNode::Kind::Ref:
            return InstantiateRef(ctx, node.ref_id, copy_tag);
        case AttackNode::Kind::Gate: {
            AttackNode gate = AttackNode::Gate2(node.gate, node.label);
            for (const AttackNode& c : node.children) {
                auto child = InstantiateNode(ctx, c, copy_tag);
                if (child) gate.children.push_back(std::move(*child));
            }
            if (gate.children.empty()) {
                throw BadParameters("gate lost every child: " + node.label);
            }
            return gate;
        }
        }
        throw std::logic_error("unreachable");
    };

    if (copies == 1) return one_copy(tag);
    // (X times): X separate AND sub-trees with distinct instance tags.
    AttackNode expanded = AttackNode::Gate2(GateKind::And, node.label + " (x" +
                                                               std::to_string(copies) + ")");
    for (int64_t i = 0; i < copies; ++i) {
        std::string copy_tag = tag.empty() ? std::to_string(i + 1)
                                           : tag + "." + std::to_string(i + 1);
        expanded.children.push_back(one_copy(copy_tag));
    }
    return expanded;
}

} // namespace

void CheckConstraint(const std::string& constraint, const ParamMap& params)
{
    size_t eq = constraint.find('=');
    if (eq == std::string::npos) throw BadParameters("malformed constraint: " + constraint);
    int64_t lhs = EvalExpr(constraint.substr(0, eq), params);
    int64_t rhs = EvalExpr(constraint.substr(eq + 1), params);
    if (lhs != rhs) {
        throw BadParameters("constraint violated: " + constraint);
    }
}

AttackNode Instantiate(const TreeLibrary& lib, const std::string& id, const ParamMap& params)
{
    auto it = lib.find(id);
    if (it == lib.end()) throw BadReference(id);
    InstantiateCtx ctx{&lib, &params, true};
    for (const std::string& c : it->second.constraints) CheckConstraint(c, params);
    ctx.in_progress.insert(id);
    auto out = InstantiateNode(ctx, it->second.root, "");
    if (!out) throw BadParameters("tree " + id + " vanished under the given parameters");
    return *out;
}

AttackNode InstantiateShallow(const TreeLibrary& lib, const std::string& id,
                              const ParamMap& params)
{
    auto it = lib.find(id);
    if (it == lib.end()) throw BadReference(id);
    InstantiateCtx ctx{&lib, &params, false};
    for (const std::string& c : it->second.constraints) CheckConstraint(c, params);
    auto out = InstantiateNode(ctx, it->second.root, "");
    if (!out) throw BadParameters("tree " + id + " vanished under the given parameters");
    return *out;
}

AttackNode ExpandMultiplicity(const AttackNode& node, const ParamMap& params)
{
    TreeLibrary empty;
    InstantiateCtx ctx{&empty, &params, true};
    auto out = InstantiateNode(ctx, node, "");
    if (!out) throw BadParameters("node vanished under the given parameters");
    return *out;
}

size_t CountLeaves(const AttackNode& node)
{
    if (node.kind == AttackNode::Kind::Leaf) return 1;
    if (node.kind == AttackNode::Kind::Ref) return 1;
    size_t total = 0;
    for (const AttackNode& c : node.children) total += CountLeaves(c);
    return total;
}

void VisitLeaves(const AttackNode& node, const std::function<void(const AttackNode&)>& f)
{
    if (node.kind == AttackNode::Kind::Leaf) {
        f(node);
        return;
    }
    for (const AttackNode& c : node.children) VisitLeaves(c, f);
}

void AssignAttributes(AttackNode& node,
                      const std::function<LeafAttributes(const std::string&)>& source)
{
    if (node.kind == AttackNode::Kind::Leaf) {
        std::string base = node.label.substr(0, node.label.find('#'));
        node.attrs = source(base);
        return;
    }
    for (AttackNode& c : node.children) AssignAttributes(c, source);
}

std::optional<AttackNode> PruneLeaves(const AttackNode& node,
                                      const std::function<bool(const AttackNode&)>& keep)
{
    if (node.kind == AttackNode::Kind::Leaf) {
        if (keep(node)) return node;
        return std::nullopt;
    }
    AttackNode out = node;
    out.children.clear();
    for (const AttackNode& c : node.children) {
        auto kept = PruneLeaves(c, keep);
        if (kept) {
            out.children.push_back(*kept);
        } else if (node.gate != GateKind::Or) {
            return std::nullopt; // a conjunct became impossible
        }
    }
    if (out.children.empty()) return std::nullopt;
    return out;
}

namespace {

double LeafCost(const AttackNode& n)
{
    if (!n.attrs.cost) throw BadParameters("leaf missing cost: " + n.label);
    return *n.attrs.cost;
}
double LeafTime(const AttackNode& n)
{
    if (!n.attrs.time) throw BadParameters("leaf missing time: " + n.label);
    return *n.attrs.time;
}
double LeafProb(const AttackNode& n)
{
    if (!n.attrs.prob) throw BadParameters("leaf missing probability: " + n.label);
    return *n.attrs.prob;
}

struct Scalar2 {
    double value;
    std::vector<std::string> scenario;
};

Scalar2 EvalScalar(const AttackNode& node, TreeQuery query)
{
    if (node.kind == AttackNode::Kind::Leaf) {
        double v = query == TreeQuery::MinCost ? LeafCost(node) : LeafTime(node);
        return {v, {node.label}};
    }
    if (node.children.empty()) throw BadParameters("gate without children: " + node.label);
    if (node.gate == GateKind::Or) {
        std::optional<Scalar2> best;
        for (const AttackNode& c : node.children) {
            Scalar2 r = EvalScalar(c, query);
            if (!best || r.value < best->value) best = std::move(r);
        }
        return *best;
    }
    // AND / SAND: cost sums; time is max for AND, sum for SAND.
    Scalar2 out{0.0, {}};
    double time_max = 0.0;
    for (const AttackNode& c : node.children) {
        Scalar2 r = EvalScalar(c, query);
        if (query == TreeQuery::MinCost) {
            out.value += r.value;
        } else if (node.gate == GateKind::Sand) {
            out.value += r.value;
        } else {
            time_max = std::max(time_max, r.value);
        }
        out.scenario.insert(out.scenario.end(), r.scenario.begin(), r.scenario.end());
    }
    if (query == TreeQuery::MinTime && node.gate == GateKind::And) out.value = time_max;
    return out;
}

struct FrontPoint {
    double cost;
    double prob;
    std::vector<std::string> scenario;
};

std::vector<FrontPoint> PruneFront(std::vector<FrontPoint> points)
{
    std::sort(points.begin(), points.end(), [](const FrontPoint& a, const FrontPoint& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.prob > b.prob;
    });
    std::vector<FrontPoint> out;
    double best_prob = -1.0;
    for (FrontPoint& p : points) {
        if (p.prob > best_prob) {
            best_prob = p.prob;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<FrontPoint> CostProbFront(const AttackNode& node)
{
    if (node.kind == AttackNode::Kind::Leaf) {
        return {FrontPoint{LeafCost(node), LeafProb(node), {node.label}}};
    }
    if (node.children.empty()) throw BadParameters("gate without children: " + node.label);
    if (node.gate == GateKind::Or) {
        std::vector<FrontPoint> all;
        for (const AttackNode& c : node.children) {
            std::vector<FrontPoint> f = CostProbFront(c);
            all.insert(all.end(), f.begin(), f.end());
        }
        return PruneFront(std::move(all));
    }
    std::vector<FrontPoint> acc{FrontPoint{0.0, 1.0, {}}};
    for (const AttackNode& c : node.children) {
        std::vector<FrontPoint> f = CostProbFront(c);
        std::vector<FrontPoint> next;
        for (const FrontPoint& a : acc) {
            for (const FrontPoint& b : f) {
                FrontPoint combined{a.cost + b.cost, a.prob * b.prob, a.scenario};
                combined.scenario.insert(combined.scenario.end(), b.scenario.begin(),
                                         b.scenario.end());
                next.push_back(std::move(combined));
            }
        }
        acc = PruneFront(std::move(next));
    }
    return acc;
}

} // namespace

EvalResult EvalTree(const AttackNode& node, TreeQuery query, double budget)
{
    EvalResult out;
    if (query == TreeQuery::MaxProbUnderBudget) {
        std::vector<FrontPoint> front = CostProbFront(node);
        for (const FrontPoint& p : front) {
            if (p.cost <= budget && (!out.feasible || p.prob > out.value)) {
                out.feasible = true;
                out.value = p.prob;
                out.scenario = p.scenario;
            }
        }
        return out;
    }
    Scalar2 r = EvalScalar(node, query);
    out.feasible = true;
    out.value = r.value;
    out.scenario = std::move(r.scenario);
    return out;
}

std::vector<Cutset> EnumerateCutsets(const AttackNode& node, size_t max_leaves)
{
    size_t leaves = CountLeaves(node);
    if (leaves > max_leaves) throw TreeTooLarge(leaves);

    std::function<std::vector<Cutset>(const AttackNode&)> walk =
        [&](const AttackNode& n) -> std::vector<Cutset> {
        if (n.kind == AttackNode::Kind::Leaf) {
            return {Cutset{{n.label}, LeafCost(n), LeafTime(n), LeafProb(n)}};
        }
        if (n.kind == AttackNode::Kind::Ref) throw BadReference(n.ref_id);
        if (n.gate == GateKind::Or) {
            std::vector<Cutset> all;
            for (const AttackNode& c : n.children) {
                std::vector<Cutset> sub = walk(c);
                all.insert(all.end(), sub.begin(), sub.end());
            }
            return all;
        }
        std::vector<Cutset> acc{Cutset{}};
        for (const AttackNode& c : n.children) {
            std::vector<Cutset> sub = walk(c);
            std::vector<Cutset> next;
            next.reserve(acc.size() * sub.size());
            for (const Cutset& a : acc) {
                for (const Cutset& b : sub) {
                    Cutset combined;
                    combined.leaves = a.leaves;
                    combined.leaves.insert(combined.leaves.end(), b.leaves.begin(),
                                           b.leaves.end());
                    combined.cost = a.cost + b.cost;
                    combined.prob = a.prob * b.prob;
                    combined.time = n.gate == GateKind::Sand ? a.time + b.time
                                                             : std::max(a.time, b.time);
                    next.push_back(std::move(combined));
                }
            }
            acc = std::move(next);
        }
        return acc;
    };
    return walk(node);
}

} // namespace covlab

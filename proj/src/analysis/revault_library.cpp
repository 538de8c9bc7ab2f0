// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "analysis/revault_library.h"

#include "crypto/hash.h"

#include <set>

namespace covlab {

TreeLibrary LoadRevaultLibrary(const std::string& data_dir)
{
    TreeLibrary lib = LoadTreeLibraryFile(data_dir + "/trees/revault.tree");
    if (lib.size() != 22) {
        throw std::runtime_error("revault library must hold 22 trees, found " +
                                 std::to_string(lib.size()));
    }
    return lib;
}

ParamMap DefaultRevaultParams(int64_t n)
{
    ParamMap params;
    params["N"] = n;
    params["M"] = 3;
    params["K"] = 2;
    params["A"] = 1;
    params["B"] = n - 1; // satisfies A+B=N
    params["C"] = 0;
    params["D"] = 1;
    params["U"] = 1;
    params["E"] = 1;
    return params;
}

ParamMap RevaultParamsFor(const TreeLibrary& lib, const std::string& id, int64_t n)
{
    // The A/B/C split must satisfy whichever constraint the tree (or a
    // sub-tree it references) carries; no bundled tree carries both.
    std::set<std::string> constraints;
    std::set<std::string> visited;
    std::function<void(const std::string&)> gather = [&](const std::string& tree_id) {
        if (!visited.insert(tree_id).second) return;
        auto it = lib.find(tree_id);
        if (it == lib.end()) return;
        for (const std::string& c : it->second.constraints) constraints.insert(c);
        std::function<void(const AttackNode&)> walk = [&](const AttackNode& node) {
            if (node.kind == AttackNode::Kind::Ref) gather(node.ref_id);
            for (const AttackNode& child : node.children) walk(child);
        };
        walk(it->second.root);
    };
    gather(id);

    ParamMap params = DefaultRevaultParams(n);
    if (constraints.count("A+B+C=M-K+1")) {
        // M-K+1 = 2 under the default manager parameters.
        params["A"] = 1;
        params["B"] = 1;
        params["C"] = 0;
    }
    return params;
}

LeafAttributes SeededAttributes(uint64_t seed, const std::string& label)
{
    Bytes32 h = TaggedHashWriter("covlab/leaf-attrs")
                    .WriteU64(seed)
                    .Write(Bytes(label.begin(), label.end()))
                    .Finalize();
    auto word = [&](int i) {
        uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v = (v << 8) | h[i * 8 + b];
        return v;
    };
    LeafAttributes attrs;
    attrs.cost = 100.0 + double(word(0) % 9900);        // 100..9999
    attrs.time = 1.0 + double(word(1) % 99);            // 1..99
    attrs.prob = 0.05 + double(word(2) % 90) / 100.0;   // 0.05..0.94
    return attrs;
}

} // namespace covlab

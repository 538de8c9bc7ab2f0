// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "script/satisfier.h"

namespace covlab {

namespace {

// Witness elements for one policy fragment, ordered so the fragment's first
// key check consumes the last element.
std::vector<Bytes> SatisfyFragment(const Policy& p, const KeyMap& keys, const SatisfyContext& ctx)
{
    switch (p.kind) {
    case Policy::Kind::Pk: {
        if (!keys.count(p.key_name)) throw UnknownKey(p.key_name);
        auto sig = ctx.sign(p.key_name);
        if (!sig) throw Unsatisfiable("no signature available for " + p.key_name);
        return {*sig};
    }
    case Policy::Kind::Older:
        if (ctx.confirmed_age < p.blocks) {
            throw Unsatisfiable("relative lock of " + std::to_string(p.blocks) +
                                " not expired at age " + std::to_string(ctx.confirmed_age));
        }
        return {};
    case Policy::Kind::And: {
        std::vector<Bytes> right = SatisfyFragment(p.children[1], keys, ctx);
        std::vector<Bytes> left = SatisfyFragment(p.children[0], keys, ctx);
        right.insert(right.end(), left.begin(), left.end());
        return right;
    }
    case Policy::Kind::Thresh: {
        std::vector<Bytes> sigs(p.children.size());
        uint32_t have = 0;
        for (size_t i = 0; i < p.children.size() && have < p.threshold; ++i) {
            const Policy& c = p.children[i];
            if (c.kind != Policy::Kind::Pk) throw MalformedPolicy("thresh children must be pk()");
            if (!keys.count(c.key_name)) throw UnknownKey(c.key_name);
            auto sig = ctx.sign(c.key_name);
            if (sig) {
                sigs[i] = *sig;
                ++have;
            }
        }
        if (have < p.threshold) {
            throw Unsatisfiable("only " + std::to_string(have) + " of " +
                                std::to_string(p.threshold) + " required signers available");
        }
        if (p.threshold == p.children.size()) {
            // CHECKSIGVERIFY chain: no placeholders.
            std::vector<Bytes> out(sigs.rbegin(), sigs.rend());
            return out;
        }
        // CHECKSIGADD form: placeholders for unused slots, reversed so the
        // first key's element sits on top.
        std::vector<Bytes> out(sigs.rbegin(), sigs.rend());
        return out;
    }
    case Policy::Kind::Or:
        throw MalformedPolicy("or() has no linear script form; satisfy a tree leaf instead");
    }
    throw MalformedPolicy("unreachable policy kind");
}

} // namespace

Witness Satisfy(const Policy& policy, const KeyMap& keys, const SatisfyContext& ctx)
{
    Witness w;
    w.elements = SatisfyFragment(policy, keys, ctx);
    return w;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_SCRIPT_POLICY_H
#define COVLAB_SCRIPT_POLICY_H

#include "crypto/ec.h"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace covlab {

class MalformedPolicy : public std::runtime_error
{
public:
    explicit MalformedPolicy(const std::string& what) : std::runtime_error(what) {}
};

class UnknownKey : public std::runtime_error
{
public:
    explicit UnknownKey(const std::string& name) : std::runtime_error("unresolved key: " + name) {}
};

/** Access policy: pk(NAME), older(NUM), and(POL,POL), or([N@]POL,[N@]POL),
 *  thresh(NUM,POL,...). Or-weights are parsed and ignored downstream. */
struct Policy {
    enum class Kind { Pk, Older, And, Or, Thresh };

    Kind kind{Kind::Pk};
    std::string key_name;              // Pk
    uint32_t blocks{0};                // Older; >= 1
    uint32_t threshold{0};             // Thresh
    std::vector<Policy> children;      // And/Or: 2, Thresh: n
    std::vector<uint32_t> or_weights;  // Or only; empty or one entry per child

    static Policy Pk(std::string name);
    static Policy Older(uint32_t blocks);
    static Policy And(Policy a, Policy b);
    static Policy Or(Policy a, Policy b);
    static Policy Thresh(uint32_t k, std::vector<Policy> children);

    static Policy Parse(const std::string& text);
    std::string ToString() const;

    // Distinct key names, in first-appearance order.
    std::vector<std::string> Keys() const;

    // Satisfaction predicate over a signer set and a single lock state.
    bool Satisfied(const std::set<std::string>& signers, bool lock_expired) const;

    bool operator==(const Policy& o) const { return ToString() == o.ToString(); }
};

using KeyMap = std::map<std::string, GroupPoint>;

} // namespace covlab

#endif // COVLAB_SCRIPT_POLICY_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_SCRIPT_SATISFIER_H
#define COVLAB_SCRIPT_SATISFIER_H

#include "script/interpreter.h"
#include "script/policy.h"

#include <functional>
#include <stdexcept>

namespace covlab {

class Unsatisfiable : public std::runtime_error
{
public:
    explicit Unsatisfiable(const std::string& detail) : std::runtime_error(detail) {}
};

/** Signature source for the satisfier: returns a complete witness signature
 *  element for keys it controls, nullopt otherwise. */
using SignatureOracle = std::function<std::optional<Bytes>(const std::string& key_name)>;

struct SatisfyContext {
    SignatureOracle sign;
    uint32_t confirmed_age{0};
};

// Builds the witness that makes Execute(Compile(policy), witness, ctx)
// accept. Thresh picks the k available keys of lowest index; unused key
// slots become zero-length elements.
Witness Satisfy(const Policy& policy, const KeyMap& keys, const SatisfyContext& ctx);

} // namespace covlab

#endif // COVLAB_SCRIPT_SATISFIER_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_SCRIPT_EQUIVALENCE_H
#define COVLAB_SCRIPT_EQUIVALENCE_H

#include "script/policy.h"

#include <stdexcept>
#include <vector>

namespace covlab {

class TooLarge : public std::runtime_error
{
public:
    explicit TooLarge(size_t keys)
        : std::runtime_error("brute-force bound exceeded: " + std::to_string(keys) + " keys") {}
};

// True iff for every subset of signers and every lock state, the disjunction
// over the leaf policies equals the top policy's satisfaction. Throws
// TooLarge above 16 distinct keys.
bool VerifyTreeEquivalence(const std::vector<Policy>& leaf_policies, const Policy& top_policy);

} // namespace covlab

#endif // COVLAB_SCRIPT_EQUIVALENCE_H

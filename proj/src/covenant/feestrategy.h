// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_COVENANT_FEESTRATEGY_H
#define COVLAB_COVENANT_FEESTRATEGY_H

#include "covenant/compose.h"

namespace covlab {

class UnsafeWithDependents : public std::runtime_error
{
public:
    UnsafeWithDependents()
        : std::runtime_error("fee strategy invalidates dependent covenant transactions") {}
};

enum class FeeStrategy { FeeInputs, ChangeOutputs, CpfpOutputs, PrepareFeeRange, UnsecuredFeeInputs };

std::string FeeStrategyName(FeeStrategy s);

struct StrategyAttributes {
    bool works_with_dependents{false};
    bool pinnable{false};
    bool malleable{false};

    bool operator==(const StrategyAttributes&) const = default;
};

// Signature-type prerequisites and safety attributes per strategy.
SighashFlag StrategyEnforcementFlag(FeeStrategy s);
SighashFlag StrategyCustodialFlag(FeeStrategy s);
StrategyAttributes AttributesFor(FeeStrategy s);

struct FeeStrategyResult {
    std::vector<Transaction> txs; // adjusted covenant tx (and fee child for CPFP)
    StrategyAttributes attrs;
};

/** A covenant transaction prepared for fee adjustment: the hop plus the fee
 *  wallet key used for fee inputs, change outputs or the CPFP child. */
struct FeeManagedCovenant {
    CovenantHop hop;
    Scalar fee_key;
    GroupPoint fee_pub;
    FeeStrategy strategy{FeeStrategy::CpfpOutputs};
    bool has_dependents{false};
    std::vector<Transaction> range_variants;  // PrepareFeeRange only
    std::vector<Signature> range_enf_sigs;
};

// Builds a covenant whose transaction shape and signature types match the
// strategy (change output, CPFP output, fee-range variants, A1CP classes).
FeeManagedCovenant BuildFeeManagedCovenant(ChainState& chain, FeeStrategy strategy,
                                           uint64_t amount, bool has_dependents,
                                           const std::vector<uint64_t>& fee_levels = {});

// Emits the transaction set that raises the fee by `add_fee`, marking the
// Table-row safety attributes. FeeInputs/ChangeOutputs on a transaction with
// dependents throw UnsafeWithDependents.
FeeStrategyResult ApplyFeeStrategy(ChainState& chain, FeeManagedCovenant& cov, uint64_t add_fee);

// True iff every signature class on the transaction leaves the input list
// mutable (the pinning precondition).
bool SignatureSetAllowsAddedInputs(const FeeManagedCovenant& cov);

} // namespace covlab

#endif // COVLAB_COVENANT_FEESTRATEGY_H

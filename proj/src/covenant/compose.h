// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_COVENANT_COMPOSE_H
#define COVLAB_COVENANT_COMPOSE_H

#include "covenant/session.h"

namespace covlab {

class UnsafeChain : public std::runtime_error
{
public:
    explicit UnsafeChain(const std::string& why) : std::runtime_error(why) {}
};

enum class ComposeMode { MultiDeposit, JointChain, Disjoint };

/** One pre-signed covenant hop: the deposit-side transaction, the covenant
 *  transaction with its enforcement signature, and the custodial key that can
 *  finalize it. Enforcement keys are deleted at construction. */
struct CovenantHop {
    Transaction funding;      // creates the covenant-bound output (vout 0)
    Transaction cov;          // spends it; no witnesses yet
    ScriptProgram l_cov;
    TaprootOutput bound_output;
    GroupPoint enf_pub;
    Signature enf_sig;
    SighashFlag enf_flag{SIGHASH_ALL};
    GroupPoint cust_pub;
    Scalar cust_priv;
    SighashFlag cust_flag{SIGHASH_ALL};
    DeletionRecord deletion;

    // Fully signed covenant transaction.
    Transaction Finalize() const;
};

/** A composition of hops plus the data its validity oracle needs. */
struct CovenantGraph {
    ComposeMode mode{ComposeMode::MultiDeposit};
    // MultiDeposit: deposits[i] funds input i of multi_cov.
    std::vector<CovenantHop> deposits;
    Transaction multi_cov;
    std::vector<Signature> multi_enf_sigs;
    // JointChain: hops[i+1].funding == hops[i].cov.
    std::vector<CovenantHop> hops;
    // Disjoint: two alternatives spending the same bound output.
    std::optional<CovenantHop> alt_a;
    Transaction alt_b_cov;
    Signature alt_b_enf_sig{};
};

// MultiDeposit: one covenant transaction consuming a covenant-bound output of
// each deposit; ALL-type enforcement signatures bind the full input set.
CovenantGraph ComposeMultiDeposit(ChainState& chain, size_t deposit_count, uint64_t amount_each);

// Active iff every deposit is confirmed to the given depth.
bool MultiDepositActive(const CovenantGraph& graph, const ChainState& chain, uint64_t depth = 6);

Transaction FinalizeMultiDeposit(const CovenantGraph& graph);

// JointChain: cov(i+1) references cov(i) by txid, so every intermediate must
// be immutable once signed; any non-ALL custodial flag on an intermediate
// throws UnsafeChain.
CovenantGraph ComposeJointChain(ChainState& chain, size_t length, uint64_t amount,
                                SighashFlag custodial_flag = SIGHASH_ALL);

// Disjoint: either alternative may confirm; doing so invalidates the other.
CovenantGraph ComposeDisjoint(ChainState& chain, uint64_t amount);
Transaction FinalizeDisjointB(const CovenantGraph& graph);

} // namespace covlab

#endif // COVLAB_COVENANT_COMPOSE_H

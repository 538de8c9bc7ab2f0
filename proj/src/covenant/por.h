// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_COVENANT_POR_H
#define COVLAB_COVENANT_POR_H

#include "covenant/session.h"

namespace covlab {

class PorUnsupported : public std::runtime_error
{
public:
    PorUnsupported() : std::runtime_error("proof-of-reserves requires a custodial script") {}
};

/** Proof that the custodians can eventually finalize TX_cov, without giving
 *  the verifier that ability. The demonstration transaction is invalid by
 *  construction (it creates more than it consumes). */
struct ProofOfReserves {
    Transaction demo_tx;        // spends a fake custodial output; fully witnessed
    TxOutput fake_output;       // taproot output committing to l_cust alone
    Outpoint fake_outpoint;
    ScriptProgram l_cust;
    ScriptProgram l_cov;
    Transaction tx_cov;
    std::vector<Signature> enf_sigs;
    std::vector<SighashFlag> enf_flags;
    std::vector<GroupPoint> enf_pubs;
    std::vector<GroupPoint> cust_pubs;
    uint32_t m{0}, j{0};
    Transaction tx_dep; // for TX_cov digest reconstruction
};

// Builds the proof from a completed covenant; `signer` supplies the j
// custodial keys for the demonstration signature.
ProofOfReserves BuildProofOfReserves(
    const CovenantArtifacts& artifacts,
    const std::function<std::optional<Scalar>(size_t cust_index)>& signer);

// Verifies every signature and TX_cov's shape. Confers no spend capability:
// the demonstration signatures bind the fake output, not the covenant.
bool VerifyProofOfReserves(const ProofOfReserves& por);

} // namespace covlab

#endif // COVLAB_COVENANT_POR_H

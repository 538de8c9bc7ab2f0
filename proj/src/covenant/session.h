// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_COVENANT_SESSION_H
#define COVLAB_COVENANT_SESSION_H

#include "chainsim/chain.h"
#include "crypto/keystore.h"
#include "script/compiler.h"
#include "taproot/taptree.h"
#include "txmodel/sighash.h"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace covlab {

// m-of-n CHECKSIGADD multisig fragment over the given keys. The non-final
// form ends in NUMEQUALVERIFY so fragments compose left to right.
ScriptProgram MultisigFragment(const std::vector<GroupPoint>& keys, uint32_t threshold);
ScriptProgram MultisigFragment(const std::vector<GroupPoint>& keys, uint32_t threshold, bool final);

// l_cov = l_enf || l_cust.
ScriptProgram CovenantScript(const std::vector<GroupPoint>& enf_keys, uint32_t m,
                             const std::vector<GroupPoint>& cust_keys, uint32_t j);

// Witness elements for one CHECKSIGADD fragment: signature elements by key
// index, zero-length placeholders elsewhere, reversed so the first key's
// element is consumed first.
std::vector<Bytes> MultisigWitnessElements(size_t key_count, const std::map<size_t, Bytes>& sigs);

/** Parameters for one deleted-key covenant instance. */
struct CovenantSpecParams {
    uint32_t n{2}, m{2}; // enforcement keys and threshold
    uint32_t k{2}, j{2}; // custodial keys and threshold
    uint64_t deposit_amount{100000};
    uint64_t cov_fee{4000};
    std::vector<SighashFlag> enforcement_flags;          // default: ALL per enforcer
    std::optional<SighashFlag> custodial_flag;           // default: ALL
    std::vector<TxOutput> cov_outputs;                   // default: single output to a stub script
    std::optional<uint64_t> step_deadline;               // abort with Timeout beyond this step
    DeletionMethod deletion_method{DeletionMethod::Destroy};
};

/** Live state of the protocol run plus the artifact set it produces. */
struct CovenantArtifacts {
    CovenantSpecParams params;
    Transaction tx_dep;
    Bytes32 dep_txid{};
    uint32_t cov_vout{0};
    Transaction tx_cov; // input bound to the covenant output; no witnesses
    std::vector<GroupPoint> enf_pubs;
    std::vector<GroupPoint> cust_pubs;
    std::vector<Scalar> cust_privs;           // world-state: each custodian's signing key
    std::vector<Signature> enf_sigs;          // one per enforcer, in index order
    std::vector<SighashFlag> enf_sig_flags;
    std::vector<DeletionRecord> deletions;    // one per enforcer
    ScriptProgram l_cov;
    TaprootOutput cov_output;                 // taproot output committing to l_cov
    std::vector<bool> custodian_has_copy;     // storage redundancy per custodian

    Bytes32 CovTxid() const { return Txid(tx_cov); }
    PrevoutView DepView() const;
};

struct TranscriptEntry {
    int step{0};
    std::string from, to, kind, note;
};

enum class SessionOutcome { Completed, Aborted };

struct SessionResult {
    SessionOutcome outcome{SessionOutcome::Aborted};
    int abort_step{0};
    std::string abort_reason;   // BadScript | BadSignature | Timeout
    std::string aborting_party;
    std::vector<TranscriptEntry> transcript;
    std::optional<CovenantArtifacts> artifacts;

    nlohmann::ordered_json ToJson() const;
};

/** Per-message tamper hook. Returning true means the adversary replaced the
 *  payload; the session applies it only on channels whose credentials the
 *  adversary holds (content tampering on honest-keyed channels is impossible
 *  by construction). */
struct SessionAdversary {
    std::set<std::string> stolen_credentials;
    // Called with (step, from, to); may rewrite the named payload fields via
    // the hooks below. Only Ajolote/covenant message types can be fabricated.
    std::function<std::optional<GroupPoint>(int step, const std::string& from,
                                            const std::string& to, const GroupPoint& key)>
        replace_key;
    std::function<std::optional<ScriptProgram>(int step, const std::string& from,
                                               const std::string& to, const ScriptProgram& script)>
        replace_script;
    std::function<std::optional<Signature>(int step, const std::string& from,
                                           const std::string& to, const Signature& sig)>
        replace_sig;
    std::set<std::string> unresponsive_parties;

    bool Controls(const std::string& party) const { return stolen_credentials.count(party) > 0; }
};

// Runs the deposit/enforce/store protocol end to end against the chain.
// Honest runs broadcast TX_dep, populate TX_cov with verified enforcement
// signatures at every custodian, and leave a deletion record per enforcer.
SessionResult RunSession(ChainState& chain, const CovenantSpecParams& params,
                         const SessionAdversary* adversary = nullptr);

enum class CovenantStatusKind { Pending, Active, Broken };

struct CovenantStatus {
    CovenantStatusKind kind{CovenantStatusKind::Pending};
    std::string reason;
};

// Active iff the signed TX_cov is stored somewhere, fewer than m enforcement
// scalars were recovered, and TX_dep has >= `depth` confirmations.
CovenantStatus CheckEnforcement(const CovenantArtifacts& artifacts, const ChainState& chain,
                                const std::vector<AttackerLevel>& recovery_attempts,
                                uint64_t depth = 6);

// Adds j custodial signatures (from the oracle) to TX_cov's witness so it
// satisfies l_enf || l_cust. Throws Unsatisfiable with fewer than j signers.
Transaction FinalizeCovenant(const CovenantArtifacts& artifacts,
                             const std::function<std::optional<Scalar>(size_t cust_index)>& signer);

} // namespace covlab

#endif // COVLAB_COVENANT_SESSION_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "covenant/session.h"

#include "crypto/hash.h"
#include "script/satisfier.h"

namespace covlab {

ScriptProgram MultisigFragment(const std::vector<GroupPoint>& keys, uint32_t threshold)
{
    return MultisigFragment(keys, threshold, true);
}

ScriptProgram MultisigFragment(const std::vector<GroupPoint>& keys, uint32_t threshold, bool final)
{
    if (keys.empty() || threshold < 1 || threshold > keys.size()) {
        throw MalformedPolicy("multisig fragment bounds");
    }
    ScriptProgram prog;
    for (size_t i = 0; i < keys.size(); ++i) {
        prog.instructions.push_back(Instruction::MakePushKey(keys[i]));
        prog.instructions.push_back(
            Instruction::Simple(i == 0 ? Opcode::CheckSig : Opcode::CheckSigAdd));
    }
    prog.instructions.push_back(Instruction::MakePushNum(threshold));
    prog.instructions.push_back(
        Instruction::Simple(final ? Opcode::NumEqual : Opcode::NumEqualVerify));
    return prog;
}

ScriptProgram CovenantScript(const std::vector<GroupPoint>& enf_keys, uint32_t m,
                             const std::vector<GroupPoint>& cust_keys, uint32_t j)
{
    // The enforcement fragment runs first and must consume its own result so
    // the custodial fragment sees a clean stack.
    ScriptProgram out = MultisigFragment(enf_keys, m, false);
    ScriptProgram cust = MultisigFragment(cust_keys, j, true);
    out.instructions.insert(out.instructions.end(), cust.instructions.begin(),
                            cust.instructions.end());
    return out;
}

std::vector<Bytes> MultisigWitnessElements(size_t key_count, const std::map<size_t, Bytes>& sigs)
{
    std::vector<Bytes> out;
    for (size_t i = key_count; i-- > 0;) {
        auto it = sigs.find(i);
        out.push_back(it == sigs.end() ? Bytes{} : it->second);
    }
    return out;
}

PrevoutView CovenantArtifacts::DepView() const
{
    Transaction dep = tx_dep;
    Bytes32 id = dep_txid;
    return [dep, id](const Outpoint& out) -> std::optional<TxOutput> {
        if (out.txid == id && out.index < dep.outputs.size()) return dep.outputs[out.index];
        return std::nullopt;
    };
}

nlohmann::ordered_json SessionResult::ToJson() const
{
    nlohmann::ordered_json j;
    j["outcome"] = outcome == SessionOutcome::Completed ? "completed" : "aborted";
    if (outcome == SessionOutcome::Aborted) {
        j["abort_step"] = abort_step;
        j["abort_reason"] = abort_reason;
        j["aborting_party"] = aborting_party;
    }
    j["transcript"] = nlohmann::ordered_json::array();
    for (const TranscriptEntry& t : transcript) {
        nlohmann::ordered_json e;
        e["step"] = t.step;
        e["from"] = t.from;
        e["to"] = t.to;
        e["kind"] = t.kind;
        e["note"] = t.note;
        j["transcript"].push_back(e);
    }
    return j;
}

namespace {

// Expected structural shape of l_cov for (m,n,j,k): two CHECKSIGADD
// fragments back to back.
bool ScriptShapeMatches(const ScriptProgram& script, uint32_t n, uint32_t m, uint32_t k,
                        uint32_t j)
{
    std::vector<GroupPoint> keys = script.PushedKeys();
    if (keys.size() != size_t(n) + size_t(k)) return false;
    ScriptProgram expected = CovenantScript(std::vector<GroupPoint>(keys.begin(), keys.begin() + n),
                                            m,
                                            std::vector<GroupPoint>(keys.begin() + n, keys.end()),
                                            j);
    return expected == script;
}

struct Enforcer {
    Keystore store;
    std::string key_id;
    GroupPoint pub;
    SighashFlag flag{SIGHASH_ALL};
    // The l_cov and outpoint data this enforcer received in step 4.
    std::optional<ScriptProgram> received_script;
    Outpoint received_outpoint{};
    uint64_t received_amount{0};
    Bytes received_spk;
};

struct Custodian {
    Scalar priv;
    GroupPoint pub;
    std::optional<ScriptProgram> received_script;
    Outpoint received_outpoint{};
    uint64_t received_amount{0};
    Bytes received_spk;
    bool stored{false};
};

} // namespace

SessionResult RunSession(ChainState& chain, const CovenantSpecParams& params_in,
                         const SessionAdversary* adversary)
{
    CovenantSpecParams params = params_in;
    if (params.enforcement_flags.empty()) {
        params.enforcement_flags.assign(params.n, SIGHASH_ALL);
    }
    if (params.cov_outputs.empty()) {
        TxOutput out;
        out.amount = params.deposit_amount - params.cov_fee;
        out.script = Bytes{0xaa}; // pre-agreed template destination stub
        params.cov_outputs.push_back(out);
    }

    SessionResult result;
    auto log = [&](int step, const std::string& from, const std::string& to,
                   const std::string& kind, const std::string& note = "") {
        result.transcript.push_back(TranscriptEntry{step, from, to, kind, note});
    };
    auto abort = [&](int step, const std::string& reason, const std::string& party) {
        result.outcome = SessionOutcome::Aborted;
        result.abort_step = step;
        result.abort_reason = reason;
        result.aborting_party = party;
        log(step, party, "*", "abort", reason);
        return result;
    };
    auto deadline_hit = [&](int step) {
        return params.step_deadline && static_cast<uint64_t>(step) > *params.step_deadline;
    };
    auto unresponsive = [&](const std::string& party) {
        return adversary && adversary->unresponsive_parties.count(party) > 0;
    };

    // Tamper helpers: apply only when the adversary holds the sender's or
    // receiver's channel credentials (Dolev-Yao with endpoint compromise).
    auto maybe_replace_key = [&](int step, const std::string& from, const std::string& to,
                                 const GroupPoint& key) -> GroupPoint {
        if (adversary && adversary->replace_key &&
            (adversary->Controls(from) || adversary->Controls(to))) {
            auto r = adversary->replace_key(step, from, to, key);
            if (r) return *r;
        }
        return key;
    };
    auto maybe_replace_script = [&](int step, const std::string& from, const std::string& to,
                                    const ScriptProgram& s) -> ScriptProgram {
        if (adversary && adversary->replace_script &&
            (adversary->Controls(from) || adversary->Controls(to))) {
            auto r = adversary->replace_script(step, from, to, s);
            if (r) return *r;
        }
        return s;
    };
    auto maybe_replace_sig = [&](int step, const std::string& from, const std::string& to,
                                 const Signature& s) -> Signature {
        if (adversary && adversary->replace_sig &&
            (adversary->Controls(from) || adversary->Controls(to))) {
            auto r = adversary->replace_sig(step, from, to, s);
            if (r) return *r;
        }
        return s;
    };

    // Step 1: custodial public keys to the depositor.
    std::vector<Custodian> custodians(params.k);
    std::vector<GroupPoint> cust_pubs_at_depositor;
    for (uint32_t i = 0; i < params.k; ++i) {
        std::string name = "custodian-" + std::to_string(i + 1);
        if (unresponsive(name) || deadline_hit(1)) return abort(1, "Timeout", name);
        Bytes32 seed = TaggedHashWriter("covlab/cust-seed")
                           .WriteU64(chain.Height())
                           .WriteU64(i)
                           .WriteU64(chain.EventLog().size())
                           .Finalize();
        KeyPair kp = KeypairGen(seed);
        custodians[i].priv = kp.priv;
        custodians[i].pub = kp.pub;
        cust_pubs_at_depositor.push_back(maybe_replace_key(1, name, "depositor", kp.pub));
        log(1, name, "depositor", "custodial-key");
    }

    // Step 2: enforcement keys to the depositor.
    std::vector<Enforcer> enforcers(params.n);
    std::vector<GroupPoint> enf_pubs_at_depositor;
    for (uint32_t l = 0; l < params.n; ++l) {
        std::string name = "enforcer-" + std::to_string(l + 1);
        if (unresponsive(name) || deadline_hit(2)) return abort(2, "Timeout", name);
        Bytes32 seed = TaggedHashWriter("covlab/enf-seed")
                           .WriteU64(chain.Height())
                           .WriteU64(l)
                           .WriteU64(chain.EventLog().size())
                           .Finalize();
        KeyPair kp = KeypairGen(seed);
        enforcers[l].key_id = "p_" + std::to_string(l + 1);
        enforcers[l].store.Put(enforcers[l].key_id, kp.priv);
        enforcers[l].pub = kp.pub;
        enforcers[l].flag = params.enforcement_flags[l];
        enf_pubs_at_depositor.push_back(maybe_replace_key(2, name, "depositor", kp.pub));
        log(2, name, "depositor", "enforcement-key");
    }

    // Step 3: the depositor assembles TX_dep paying to l_cov.
    ScriptProgram l_cov =
        CovenantScript(enf_pubs_at_depositor, params.m, cust_pubs_at_depositor, params.j);
    TapTree tree = TapTree::Leaf(l_cov);
    TaprootOutput cov_out = OutputKey(NumsInternalKey(), tree);
    Outpoint funding = chain.Mint(params.deposit_amount + 1000, Bytes{0xfd});
    Transaction tx_dep;
    tx_dep.inputs.push_back(TxInput{funding.txid, funding.index, 0xffffffff, {}});
    tx_dep.outputs.push_back(TxOutput{params.deposit_amount, TaprootScript(cov_out.XOnly())});
    Bytes32 dep_txid = Txid(tx_dep);
    log(3, "depositor", "depositor", "assemble-deposit", HexStr(dep_txid).substr(0, 12));

    // Steps 4-5: previous-output data to every party; each fills TX_cov.
    Transaction tx_cov;
    tx_cov.inputs.push_back(TxInput{dep_txid, 0, 0xffffffff, {}});
    tx_cov.outputs = params.cov_outputs;

    for (uint32_t l = 0; l < params.n; ++l) {
        std::string name = "enforcer-" + std::to_string(l + 1);
        enforcers[l].received_script = maybe_replace_script(4, "depositor", name, l_cov);
        enforcers[l].received_outpoint = Outpoint{dep_txid, 0};
        enforcers[l].received_amount = params.deposit_amount;
        enforcers[l].received_spk = tx_dep.outputs[0].script;
        log(4, "depositor", name, "outpoint-data");
    }
    for (uint32_t i = 0; i < params.k; ++i) {
        std::string name = "custodian-" + std::to_string(i + 1);
        custodians[i].received_script = maybe_replace_script(4, "depositor", name, l_cov);
        custodians[i].received_outpoint = Outpoint{dep_txid, 0};
        custodians[i].received_amount = params.deposit_amount;
        custodians[i].received_spk = tx_dep.outputs[0].script;
        log(4, "depositor", name, "outpoint-data");
    }
    log(5, "*", "*", "fill-covenant-input");

    // Step 6: script format and own-key-location verification.
    for (uint32_t l = 0; l < params.n; ++l) {
        std::string name = "enforcer-" + std::to_string(l + 1);
        const ScriptProgram& s = *enforcers[l].received_script;
        std::vector<GroupPoint> keys = s.PushedKeys();
        bool ok = ScriptShapeMatches(s, params.n, params.m, params.k, params.j) &&
                  keys.size() > l && keys[l] == enforcers[l].pub;
        log(6, name, name, "verify-script", ok ? "ok" : "mismatch");
        if (!ok) return abort(6, "BadScript", name);
    }
    for (uint32_t i = 0; i < params.k; ++i) {
        std::string name = "custodian-" + std::to_string(i + 1);
        const ScriptProgram& s = *custodians[i].received_script;
        std::vector<GroupPoint> keys = s.PushedKeys();
        bool ok = ScriptShapeMatches(s, params.n, params.m, params.k, params.j) &&
                  keys.size() > params.n + i && keys[params.n + i] == custodians[i].pub;
        log(6, name, name, "verify-script", ok ? "ok" : "mismatch");
        if (!ok) return abort(6, "BadScript", name);
    }

    // Step 7: enforcement signatures; delete the ephemeral keys.
    std::vector<Signature> enf_sigs_at_depositor;
    std::vector<DeletionRecord> deletions;
    for (uint32_t l = 0; l < params.n; ++l) {
        std::string name = "enforcer-" + std::to_string(l + 1);
        if (unresponsive(name) || deadline_hit(7)) return abort(7, "Timeout", name);
        Enforcer& enf = enforcers[l];
        // The enforcer signs its own view of TX_cov against the outpoint data
        // it received.
        uint64_t amount = enf.received_amount;
        Bytes spk = enf.received_spk;
        Outpoint op = enf.received_outpoint;
        PrevoutView view = [op, amount, spk](const Outpoint& out) -> std::optional<TxOutput> {
            if (out == op) return TxOutput{amount, spk};
            return std::nullopt;
        };
        Bytes32 digest = SighashMsg(tx_cov, 0, Semantics::Taproot, enf.flag, view);
        Signature sig = enf.store.SignDigest(enf.key_id, digest);
        deletions.push_back(enf.store.DeleteKey(enf.key_id, params.deletion_method));
        log(7, name, "depositor", "enforcement-signature", "key deleted");
        enf_sigs_at_depositor.push_back(maybe_replace_sig(7, name, "depositor", sig));
    }

    // Step 8: the depositor verifies every signature, then broadcasts TX_dep.
    {
        PrevoutView view = [&](const Outpoint& out) -> std::optional<TxOutput> {
            if (out.txid == dep_txid && out.index == 0) return tx_dep.outputs[0];
            return std::nullopt;
        };
        for (uint32_t l = 0; l < params.n; ++l) {
            Bytes32 digest =
                SighashMsg(tx_cov, 0, Semantics::Taproot, params.enforcement_flags[l], view);
            if (!Verify(enf_pubs_at_depositor[l], digest, enf_sigs_at_depositor[l])) {
                return abort(8, "BadSignature", "depositor");
            }
        }
        SubmitResult broadcast = chain.Submit(tx_dep);
        log(8, "depositor", "network", "broadcast-deposit",
            broadcast.accepted ? "accepted" : RejectReasonName(broadcast.reason));
        if (!broadcast.accepted) return abort(8, "BadSignature", "depositor");
    }

    // Steps 9-10: signatures to the custodians; verify and store.
    for (uint32_t i = 0; i < params.k; ++i) {
        std::string name = "custodian-" + std::to_string(i + 1);
        if (unresponsive(name) || deadline_hit(10)) return abort(10, "Timeout", name);
        Custodian& cust = custodians[i];
        uint64_t amount = cust.received_amount;
        Bytes spk = cust.received_spk;
        Outpoint op = cust.received_outpoint;
        PrevoutView view = [op, amount, spk](const Outpoint& out) -> std::optional<TxOutput> {
            if (out == op) return TxOutput{amount, spk};
            return std::nullopt;
        };
        std::vector<GroupPoint> keys = cust.received_script->PushedKeys();
        for (uint32_t l = 0; l < params.n; ++l) {
            Bytes32 digest =
                SighashMsg(tx_cov, 0, Semantics::Taproot, params.enforcement_flags[l], view);
            if (!Verify(keys[l], digest, enf_sigs_at_depositor[l])) {
                return abort(10, "BadSignature", name);
            }
        }
        cust.stored = true;
        log(10, "depositor", name, "store-covenant", "verified");
    }

    // Step 11 happens on-chain: parties await depth 6 before treating the
    // covenant as active (see CheckEnforcement).
    log(11, "*", "*", "await-depth", "6");

    CovenantArtifacts artifacts;
    artifacts.params = params;
    artifacts.tx_dep = tx_dep;
    artifacts.dep_txid = dep_txid;
    artifacts.cov_vout = 0;
    artifacts.tx_cov = tx_cov;
    for (const Enforcer& e : enforcers) artifacts.enf_pubs.push_back(e.pub);
    for (const Custodian& c : custodians) artifacts.cust_pubs.push_back(c.pub);
    for (const Custodian& c : custodians) artifacts.cust_privs.push_back(c.priv);
    artifacts.enf_sigs = enf_sigs_at_depositor;
    artifacts.enf_sig_flags = params.enforcement_flags;
    artifacts.deletions = deletions;
    artifacts.l_cov = l_cov;
    artifacts.cov_output = cov_out;
    for (const Custodian& c : custodians) artifacts.custodian_has_copy.push_back(c.stored);

    result.outcome = SessionOutcome::Completed;
    result.artifacts = std::move(artifacts);
    return result;
}

CovenantStatus CheckEnforcement(const CovenantArtifacts& artifacts, const ChainState& chain,
                                const std::vector<AttackerLevel>& recovery_attempts,
                                uint64_t depth)
{
    bool any_copy = false;
    for (bool stored : artifacts.custodian_has_copy) any_copy = any_copy || stored;
    if (!any_copy) return {CovenantStatusKind::Broken, "covenant transaction storage lost"};

    uint32_t recovered = 0;
    for (const DeletionRecord& record : artifacts.deletions) {
        for (AttackerLevel level : recovery_attempts) {
            if (record.AttemptRecovery(level)) {
                ++recovered;
                break;
            }
        }
    }
    if (recovered >= artifacts.params.m) {
        return {CovenantStatusKind::Broken,
                std::to_string(recovered) + " enforcement scalars recovered"};
    }
    if (chain.Confirmations(artifacts.dep_txid) < depth) {
        return {CovenantStatusKind::Pending, "deposit not sufficiently deep"};
    }
    return {CovenantStatusKind::Active, ""};
}

Transaction FinalizeCovenant(const CovenantArtifacts& artifacts,
                             const std::function<std::optional<Scalar>(size_t)>& signer)
{
    const CovenantSpecParams& p = artifacts.params;
    PrevoutView view = artifacts.DepView();

    // Custodial signatures, lowest index first.
    SighashFlag cust_flag = p.custodial_flag.value_or(SIGHASH_ALL);
    std::map<size_t, Bytes> cust_sigs;
    for (size_t i = 0; i < artifacts.cust_pubs.size() && cust_sigs.size() < p.j; ++i) {
        auto priv = signer(i);
        if (!priv) continue;
        Signature sig = SignInput(artifacts.tx_cov, 0, *priv, Semantics::Taproot, cust_flag, view);
        cust_sigs[i] = EncodeSigElement(sig, cust_flag);
    }
    if (cust_sigs.size() < p.j) {
        throw Unsatisfiable("only " + std::to_string(cust_sigs.size()) + " of " +
                            std::to_string(p.j) + " custodial signers available");
    }
    std::map<size_t, Bytes> enf_sigs;
    for (size_t l = 0; l < artifacts.enf_sigs.size(); ++l) {
        enf_sigs[l] = EncodeSigElement(artifacts.enf_sigs[l], artifacts.enf_sig_flags[l]);
    }

    Transaction finalized = artifacts.tx_cov;
    finalized.witnesses.assign(finalized.inputs.size(), {});
    WitnessStack& w = finalized.witnesses[0];
    // The custodial fragment executes second, so its elements sit deeper.
    for (const Bytes& e : MultisigWitnessElements(artifacts.cust_pubs.size(), cust_sigs)) {
        w.push_back(e);
    }
    for (const Bytes& e : MultisigWitnessElements(artifacts.enf_pubs.size(), enf_sigs)) {
        w.push_back(e);
    }
    TapLeaf leaf;
    leaf.script = artifacts.l_cov;
    TapTree tree = TapTree::Leaf(leaf);
    ControlBlock cb = ProveInclusion(tree, leaf, NumsInternalKey());
    w.push_back(artifacts.l_cov.Serialize());
    w.push_back(cb.Serialize());
    return finalized;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "covenant/por.h"

#include "crypto/hash.h"
#include "script/satisfier.h"

namespace covlab {

ProofOfReserves BuildProofOfReserves(
    const CovenantArtifacts& artifacts,
    const std::function<std::optional<Scalar>(size_t)>& signer)
{
    if (artifacts.cust_pubs.empty()) throw PorUnsupported();

    ProofOfReserves por;
    por.l_cust = MultisigFragment(artifacts.cust_pubs, artifacts.params.j);
    por.l_cov = artifacts.l_cov;
    por.tx_cov = artifacts.tx_cov;
    por.enf_sigs = artifacts.enf_sigs;
    por.enf_flags = artifacts.enf_sig_flags;
    por.enf_pubs = artifacts.enf_pubs;
    por.cust_pubs = artifacts.cust_pubs;
    por.m = artifacts.params.m;
    por.j = artifacts.params.j;
    por.tx_dep = artifacts.tx_dep;

    // Fake output locked by l_cust alone; the demonstration transaction
    // creates more bitcoin than it consumes, so it can never confirm.
    TapLeaf leaf;
    leaf.script = por.l_cust;
    TapTree tree = TapTree::Leaf(leaf);
    TaprootOutput out = OutputKey(NumsInternalKey(), tree);
    por.fake_output = TxOutput{1000, TaprootScript(out.XOnly())};
    por.fake_outpoint =
        Outpoint{TaggedHash("covlab/por-fake-outpoint", artifacts.l_cov.Serialize()), 0};

    Transaction demo;
    demo.inputs.push_back(TxInput{por.fake_outpoint.txid, 0, 0xffffffff, {}});
    demo.outputs.push_back(TxOutput{por.fake_output.amount + 1, Bytes{0xee}});

    TxOutput fake = por.fake_output;
    Outpoint fake_op = por.fake_outpoint;
    PrevoutView view = [fake, fake_op](const Outpoint& o) -> std::optional<TxOutput> {
        if (o == fake_op) return fake;
        return std::nullopt;
    };
    std::map<size_t, Bytes> sigs;
    for (size_t i = 0; i < artifacts.cust_pubs.size() && sigs.size() < por.j; ++i) {
        auto priv = signer(i);
        if (!priv) continue;
        Signature sig = SignInput(demo, 0, *priv, Semantics::Taproot, SIGHASH_ALL, view);
        sigs[i] = EncodeSigElement(sig, SIGHASH_ALL);
    }
    if (sigs.size() < por.j) throw Unsatisfiable("insufficient custodial signers for the proof");

    demo.witnesses.assign(1, {});
    for (const Bytes& e : MultisigWitnessElements(artifacts.cust_pubs.size(), sigs)) {
        demo.witnesses[0].push_back(e);
    }
    demo.witnesses[0].push_back(por.l_cust.Serialize());
    demo.witnesses[0].push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());
    por.demo_tx = demo;
    return por;
}

bool VerifyProofOfReserves(const ProofOfReserves& por)
{
    // 1. The demonstration transaction must be invalid by construction.
    uint64_t in_sum = por.fake_output.amount;
    uint64_t out_sum = 0;
    for (const TxOutput& o : por.demo_tx.outputs) out_sum += o.amount;
    if (out_sum <= in_sum) return false;

    // 2. Its witness satisfies the fake output's l_cust.
    auto fake_key = TaprootScriptKey(por.fake_output.script);
    if (!fake_key) return false;
    if (por.demo_tx.witnesses.size() != 1 || por.demo_tx.witnesses[0].size() < 2) return false;
    const WitnessStack& w = por.demo_tx.witnesses[0];
    auto script = ScriptProgram::Parse(w[w.size() - 2]);
    auto control = ControlBlock::Parse(w.back());
    if (!script || !control) return false;
    TapLeaf leaf;
    leaf.script = *script;
    if (!VerifyControlBlock(*fake_key, leaf, *control)) return false;
    if (!(*script == por.l_cust)) return false;
    TxOutput fake = por.fake_output;
    Outpoint fake_op = por.fake_outpoint;
    ExecContext ctx;
    ctx.tx = &por.demo_tx;
    ctx.input_index = 0;
    ctx.prevouts = [fake, fake_op](const Outpoint& o) -> std::optional<TxOutput> {
        if (o == fake_op) return fake;
        return std::nullopt;
    };
    Witness stack;
    stack.elements.assign(w.begin(), w.end() - 2);
    if (!Execute(*script, stack, ctx).accepted) return false;

    // 3. Every enforcement signature verifies for TX_cov.
    Bytes32 dep_id = Txid(por.tx_dep);
    Transaction dep = por.tx_dep;
    PrevoutView dep_view = [dep, dep_id](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == dep_id && o.index < dep.outputs.size()) return dep.outputs[o.index];
        return std::nullopt;
    };
    if (por.enf_sigs.size() != por.enf_pubs.size()) return false;
    for (size_t l = 0; l < por.enf_sigs.size(); ++l) {
        if (!VerifyInput(por.tx_cov, 0, por.enf_pubs[l], por.enf_sigs[l], Semantics::Taproot,
                         por.enf_flags[l], dep_view)) {
            return false;
        }
    }

    // 4. TX_cov spends the covenant-bound output and l_cov embeds l_cust.
    if (por.tx_cov.inputs.empty() || !(por.tx_cov.inputs[0].prev_txid == dep_id)) return false;
    Bytes cov_ser = por.l_cov.Serialize();
    Bytes cust_ser = por.l_cust.Serialize();
    if (cust_ser.size() >= cov_ser.size()) return false;
    // The custodial fragment is the script's tail, in its final form.
    Bytes tail(cov_ser.end() - cust_ser.size(), cov_ser.end());
    return tail == cust_ser;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "covenant/compose.h"

#include "crypto/hash.h"

namespace covlab {

namespace {

uint64_t g_hop_counter = 0;

KeyPair HopKey(const char* role)
{
    Bytes32 seed = TaggedHashWriter("covlab/hop-key")
                       .Write(Bytes(role, role + std::string(role).size()))
                       .WriteU64(g_hop_counter++)
                       .Finalize();
    return KeypairGen(seed);
}

// 1-of-1 enforcement, 1-of-1 custodial covenant hop over the given funding
// transaction output.
CovenantHop MakeHop(const Transaction& funding, uint64_t bound_amount,
                    const std::vector<TxOutput>& cov_outputs, SighashFlag cust_flag,
                    const ScriptProgram& l_cov, const TaprootOutput& bound,
                    const KeyPair& enf, const KeyPair& cust)
{
    Transaction cov;
    cov.inputs.push_back(TxInput{Txid(funding), 0, 0xffffffff, {}});
    cov.outputs = cov_outputs;

    Bytes32 funding_id = Txid(funding);
    Bytes spk = funding.outputs[0].script;
    PrevoutView view = [funding_id, bound_amount, spk](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == funding_id && o.index == 0) return TxOutput{bound_amount, spk};
        return std::nullopt;
    };
    Signature sig = SignInput(cov, 0, enf.priv, Semantics::Taproot, SIGHASH_ALL, view);

    Keystore store;
    store.Put("e", enf.priv);
    DeletionRecord deletion = store.DeleteKey("e", DeletionMethod::Destroy);

    CovenantHop hop{funding, cov,      l_cov,     bound,    enf.pub, sig,
                    SIGHASH_ALL, cust.pub, cust.priv, cust_flag, deletion};
    return hop;
}

CovenantHop BuildHop(const Transaction& funding, uint64_t bound_amount,
                     const std::vector<TxOutput>& cov_outputs, SighashFlag cust_flag)
{
    KeyPair enf = HopKey("enf");
    KeyPair cust = HopKey("cust");
    ScriptProgram l_cov = CovenantScript({enf.pub}, 1, {cust.pub}, 1);
    TaprootOutput bound = OutputKey(NumsInternalKey(), TapTree::Leaf(l_cov));
    return MakeHop(funding, bound_amount, cov_outputs, cust_flag, l_cov, bound, enf, cust);
}

Transaction FundingTx(ChainState& chain, uint64_t amount, const Bytes& bound_script)
{
    Outpoint coin = chain.Mint(amount + 1000, Bytes{0xfd});
    Transaction tx;
    tx.inputs.push_back(TxInput{coin.txid, coin.index, 0xffffffff, {}});
    tx.outputs.push_back(TxOutput{amount, bound_script});
    return tx;
}

WitnessStack HopWitness(const CovenantHop& hop, const Transaction& cov, const Signature& enf_sig)
{
    PrevoutView view = [&hop](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == Txid(hop.funding) && o.index == 0) return hop.funding.outputs[0];
        return std::nullopt;
    };
    Signature cust_sig = SignInput(cov, 0, hop.cust_priv, Semantics::Taproot, hop.cust_flag, view);
    WitnessStack w;
    w.push_back(EncodeSigElement(cust_sig, hop.cust_flag));
    w.push_back(EncodeSigElement(enf_sig, hop.enf_flag));
    TapLeaf leaf;
    leaf.script = hop.l_cov;
    TapTree tree = TapTree::Leaf(leaf);
    w.push_back(hop.l_cov.Serialize());
    w.push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());
    return w;
}

} // namespace

Transaction CovenantHop::Finalize() const
{
    Transaction out = cov;
    out.witnesses.assign(out.inputs.size(), {});
    out.witnesses[0] = HopWitness(*this, cov, enf_sig);
    return out;
}

CovenantGraph ComposeMultiDeposit(ChainState& chain, size_t deposit_count, uint64_t amount_each)
{
    CovenantGraph graph;
    graph.mode = ComposeMode::MultiDeposit;

    // Keys and bound outputs for every deposit first, since the enforcement
    // signatures commit to the complete input set.
    struct Pending {
        KeyPair enf, cust;
        ScriptProgram l_cov;
        TaprootOutput bound;
        Transaction funding;
    };
    std::vector<Pending> pending;
    for (size_t d = 0; d < deposit_count; ++d) {
        Pending p;
        p.enf = HopKey("multi-enf");
        p.cust = HopKey("multi-cust");
        p.l_cov = CovenantScript({p.enf.pub}, 1, {p.cust.pub}, 1);
        p.bound = OutputKey(NumsInternalKey(), TapTree::Leaf(p.l_cov));
        p.funding = FundingTx(chain, amount_each, TaprootScript(p.bound.XOnly()));
        pending.push_back(std::move(p));
    }

    Transaction cov;
    uint64_t total = 0;
    for (const Pending& p : pending) {
        cov.inputs.push_back(TxInput{Txid(p.funding), 0, 0xffffffff, {}});
        total += amount_each;
    }
    cov.outputs.push_back(TxOutput{total - 400 * deposit_count, Bytes{0xab}});

    PrevoutView view = [&pending, amount_each](const Outpoint& o) -> std::optional<TxOutput> {
        for (const Pending& p : pending) {
            if (o.txid == Txid(p.funding) && o.index == 0) return p.funding.outputs[0];
        }
        return std::nullopt;
    };

    for (size_t d = 0; d < deposit_count; ++d) {
        const Pending& p = pending[d];
        Signature enf_sig = SignInput(cov, d, p.enf.priv, Semantics::Taproot, SIGHASH_ALL, view);
        Keystore store;
        store.Put("e", p.enf.priv);
        DeletionRecord deletion = store.DeleteKey("e", DeletionMethod::Destroy);
        CovenantHop hop{p.funding, cov,      p.l_cov,   p.bound,  p.enf.pub, enf_sig,
                        SIGHASH_ALL, p.cust.pub, p.cust.priv, SIGHASH_ALL, deletion};
        graph.deposits.push_back(std::move(hop));
        graph.multi_enf_sigs.push_back(enf_sig);
    }
    graph.multi_cov = cov;
    return graph;
}

bool MultiDepositActive(const CovenantGraph& graph, const ChainState& chain, uint64_t depth)
{
    for (const CovenantHop& hop : graph.deposits) {
        if (chain.Confirmations(Txid(hop.funding)) < depth) return false;
    }
    return true;
}

Transaction FinalizeMultiDeposit(const CovenantGraph& graph)
{
    Transaction out = graph.multi_cov;
    out.witnesses.assign(out.inputs.size(), {});
    PrevoutView view = [&graph](const Outpoint& o) -> std::optional<TxOutput> {
        for (const CovenantHop& hop : graph.deposits) {
            if (o.txid == Txid(hop.funding) && o.index == 0) return hop.funding.outputs[0];
        }
        return std::nullopt;
    };
    for (size_t d = 0; d < graph.deposits.size(); ++d) {
        const CovenantHop& hop = graph.deposits[d];
        Signature cust_sig =
            SignInput(out, d, hop.cust_priv, Semantics::Taproot, SIGHASH_ALL, view);
        WitnessStack w;
        w.push_back(EncodeSigElement(cust_sig, SIGHASH_ALL));
        w.push_back(EncodeSigElement(graph.multi_enf_sigs[d], SIGHASH_ALL));
        TapLeaf leaf;
        leaf.script = hop.l_cov;
        TapTree tree = TapTree::Leaf(leaf);
        w.push_back(hop.l_cov.Serialize());
        w.push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());
        out.witnesses[d] = w;
    }
    return out;
}

CovenantGraph ComposeJointChain(ChainState& chain, size_t length, uint64_t amount,
                                SighashFlag custodial_flag)
{
    if (!(custodial_flag == SIGHASH_ALL)) {
        // Intermediates must be immutable: every mutable field of the
        // custodial signature class is an invalidation vector for the chain.
        throw UnsafeChain("chain link to a mutable intermediate (custodial flag " +
                          FlagName(custodial_flag) + ")");
    }
    CovenantGraph graph;
    graph.mode = ComposeMode::JointChain;

    // Build the key material and bound outputs front to back, then the
    // transactions back to front so each cov's outputs are known when signed.
    struct LinkKeys {
        KeyPair enf, cust;
        ScriptProgram l_cov;
        TaprootOutput bound;
    };
    std::vector<LinkKeys> keys(length);
    for (size_t i = 0; i < length; ++i) {
        keys[i].enf = HopKey("chain-enf");
        keys[i].cust = HopKey("chain-cust");
        keys[i].l_cov = CovenantScript({keys[i].enf.pub}, 1, {keys[i].cust.pub}, 1);
        keys[i].bound = OutputKey(NumsInternalKey(), TapTree::Leaf(keys[i].l_cov));
    }

    const uint64_t fee = 400;
    Transaction funding = FundingTx(chain, amount, TaprootScript(keys[0].bound.XOnly()));
    Transaction prev = funding;
    uint64_t value = amount;
    for (size_t i = 0; i < length; ++i) {
        std::vector<TxOutput> outs;
        uint64_t next_value = value - fee;
        if (i + 1 < length) {
            outs.push_back(TxOutput{next_value, TaprootScript(keys[i + 1].bound.XOnly())});
        } else {
            outs.push_back(TxOutput{next_value, Bytes{0xac}});
        }
        graph.hops.push_back(MakeHop(prev, value, outs, custodial_flag, keys[i].l_cov,
                                     keys[i].bound, keys[i].enf, keys[i].cust));
        prev = graph.hops.back().cov;
        value = next_value;
    }
    return graph;
}

CovenantGraph ComposeDisjoint(ChainState& chain, uint64_t amount)
{
    CovenantGraph graph;
    graph.mode = ComposeMode::Disjoint;

    KeyPair enf = HopKey("disjoint-enf");
    KeyPair cust = HopKey("disjoint-cust");
    ScriptProgram l_cov = CovenantScript({enf.pub}, 1, {cust.pub}, 1);
    TaprootOutput bound = OutputKey(NumsInternalKey(), TapTree::Leaf(l_cov));
    Transaction funding = FundingTx(chain, amount, TaprootScript(bound.XOnly()));

    Transaction cov_a;
    cov_a.inputs.push_back(TxInput{Txid(funding), 0, 0xffffffff, {}});
    cov_a.outputs.push_back(TxOutput{amount - 400, Bytes{0xa1}});
    Transaction cov_b;
    cov_b.inputs.push_back(TxInput{Txid(funding), 0, 0xffffffff, {}});
    cov_b.outputs.push_back(TxOutput{amount - 400, Bytes{0xb2}});

    Bytes32 fid = Txid(funding);
    Bytes spk = funding.outputs[0].script;
    PrevoutView view = [fid, amount, spk](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == fid && o.index == 0) return TxOutput{amount, spk};
        return std::nullopt;
    };
    Signature sig_a = SignInput(cov_a, 0, enf.priv, Semantics::Taproot, SIGHASH_ALL, view);
    Signature sig_b = SignInput(cov_b, 0, enf.priv, Semantics::Taproot, SIGHASH_ALL, view);
    Keystore store;
    store.Put("e", enf.priv);
    DeletionRecord deletion = store.DeleteKey("e", DeletionMethod::Destroy);

    CovenantHop hop{funding, cov_a,    l_cov,      bound,     enf.pub, sig_a,
                    SIGHASH_ALL, cust.pub, cust.priv, SIGHASH_ALL, deletion};
    graph.alt_a = std::move(hop);
    graph.alt_b_cov = cov_b;
    graph.alt_b_enf_sig = sig_b;
    return graph;
}

Transaction FinalizeDisjointB(const CovenantGraph& graph)
{
    const CovenantHop& a = *graph.alt_a;
    Transaction out = graph.alt_b_cov;
    out.witnesses.assign(out.inputs.size(), {});
    out.witnesses[0] = HopWitness(a, graph.alt_b_cov, graph.alt_b_enf_sig);
    return out;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "covenant/feestrategy.h"

#include "crypto/hash.h"
#include "script/satisfier.h"
#include "txmodel/mutation.h"

namespace covlab {

namespace {

uint64_t g_fee_counter = 0;

KeyPair FeeKey(const char* role)
{
    Bytes32 seed = TaggedHashWriter("covlab/fee-key")
                       .Write(Bytes(role, role + std::string(role).size()))
                       .WriteU64(g_fee_counter++)
                       .Finalize();
    return KeypairGen(seed);
}

Bytes SingleKeyTaprootScript(const GroupPoint& key, ScriptProgram* script_out = nullptr,
                             ControlBlock* cb_out = nullptr)
{
    ScriptProgram prog;
    prog.instructions.push_back(Instruction::MakePushKey(key));
    prog.instructions.push_back(Instruction::Simple(Opcode::CheckSig));
    TapLeaf leaf;
    leaf.script = prog;
    TapTree tree = TapTree::Leaf(leaf);
    TaprootOutput out = OutputKey(NumsInternalKey(), tree);
    if (script_out) *script_out = prog;
    if (cb_out) *cb_out = ProveInclusion(tree, leaf, NumsInternalKey());
    return TaprootScript(out.XOnly());
}

PrevoutView ViewOf(const Transaction& funding)
{
    Bytes32 id = Txid(funding);
    Transaction f = funding;
    return [id, f](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == id && o.index < f.outputs.size()) return f.outputs[o.index];
        return std::nullopt;
    };
}

WitnessStack CovWitness(const FeeManagedCovenant& cov, const Transaction& tx,
                        const Signature& enf_sig, const PrevoutView& view)
{
    Signature cust_sig =
        SignInput(tx, 0, cov.hop.cust_priv, Semantics::Taproot, cov.hop.cust_flag, view);
    WitnessStack w;
    w.push_back(EncodeSigElement(cust_sig, cov.hop.cust_flag));
    w.push_back(EncodeSigElement(enf_sig, cov.hop.enf_flag));
    TapLeaf leaf;
    leaf.script = cov.hop.l_cov;
    TapTree tree = TapTree::Leaf(leaf);
    w.push_back(cov.hop.l_cov.Serialize());
    w.push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());
    return w;
}

} // namespace

std::string FeeStrategyName(FeeStrategy s)
{
    switch (s) {
    case FeeStrategy::FeeInputs: return "fee_inputs";
    case FeeStrategy::ChangeOutputs: return "change_outputs";
    case FeeStrategy::CpfpOutputs: return "cpfp_outputs";
    case FeeStrategy::PrepareFeeRange: return "prepare_fee_range";
    case FeeStrategy::UnsecuredFeeInputs: return "unsecured_fee_inputs";
    }
    return "?";
}

SighashFlag StrategyEnforcementFlag(FeeStrategy s)
{
    switch (s) {
    case FeeStrategy::FeeInputs: return SIGHASH_A1CP_ALL;
    case FeeStrategy::ChangeOutputs: return SIGHASH_SINGLE;
    case FeeStrategy::CpfpOutputs: return SIGHASH_ALL;
    case FeeStrategy::PrepareFeeRange: return SIGHASH_ALL;
    case FeeStrategy::UnsecuredFeeInputs: return SIGHASH_A1CP_ALL;
    }
    return SIGHASH_ALL;
}

SighashFlag StrategyCustodialFlag(FeeStrategy s)
{
    return s == FeeStrategy::UnsecuredFeeInputs ? SIGHASH_A1CP_ALL : SIGHASH_ALL;
}

StrategyAttributes AttributesFor(FeeStrategy s)
{
    switch (s) {
    case FeeStrategy::FeeInputs: return {false, false, false};
    case FeeStrategy::ChangeOutputs: return {false, false, false};
    case FeeStrategy::CpfpOutputs: return {true, false, false};
    case FeeStrategy::PrepareFeeRange: return {true, false, false};
    case FeeStrategy::UnsecuredFeeInputs: return {false, true, true};
    }
    return {};
}

bool SignatureSetAllowsAddedInputs(const FeeManagedCovenant& cov)
{
    for (const SighashFlag& flag : {cov.hop.enf_flag, cov.hop.cust_flag}) {
        auto matrix = MutationMatrix(Semantics::Taproot, flag);
        if (!matrix.at(TxField::AppendInput)) return false;
    }
    return true;
}

FeeManagedCovenant BuildFeeManagedCovenant(ChainState& chain, FeeStrategy strategy,
                                           uint64_t amount, bool has_dependents,
                                           const std::vector<uint64_t>& fee_levels)
{
    FeeManagedCovenant out;
    out.strategy = strategy;
    out.has_dependents = has_dependents;
    KeyPair fee = FeeKey("wallet");
    out.fee_key = fee.priv;
    out.fee_pub = fee.pub;

    KeyPair enf = FeeKey("enf");
    KeyPair cust = FeeKey("cust");
    ScriptProgram l_cov = CovenantScript({enf.pub}, 1, {cust.pub}, 1);
    TaprootOutput bound = OutputKey(NumsInternalKey(), TapTree::Leaf(l_cov));

    Outpoint coin = chain.Mint(amount + 1000, Bytes{0xfd});
    Transaction funding;
    funding.inputs.push_back(TxInput{coin.txid, coin.index, 0xffffffff, {}});
    funding.outputs.push_back(TxOutput{amount, TaprootScript(bound.XOnly())});

    const uint64_t base_fee = 500;
    Transaction cov_tx;
    // Fee-managed covenants signal replaceability so post-broadcast bumps
    // (and the attacks the table warns about) are observable.
    cov_tx.inputs.push_back(TxInput{Txid(funding), 0, 0xfffffffd, {}});
    switch (strategy) {
    case FeeStrategy::ChangeOutputs:
        cov_tx.outputs.push_back(TxOutput{amount - base_fee - 20000, Bytes{0xab}});
        cov_tx.outputs.push_back(TxOutput{20000, SingleKeyTaprootScript(fee.pub)});
        break;
    case FeeStrategy::CpfpOutputs:
        cov_tx.outputs.push_back(TxOutput{amount - base_fee - 600, Bytes{0xab}});
        cov_tx.outputs.push_back(TxOutput{600, SingleKeyTaprootScript(fee.pub)});
        break;
    default:
        cov_tx.outputs.push_back(TxOutput{amount - base_fee, Bytes{0xab}});
        break;
    }

    PrevoutView view = ViewOf(funding);
    SighashFlag enf_flag = StrategyEnforcementFlag(strategy);
    Signature enf_sig = SignInput(cov_tx, 0, enf.priv, Semantics::Taproot, enf_flag, view);

    if (strategy == FeeStrategy::PrepareFeeRange) {
        for (uint64_t level : fee_levels) {
            Transaction variant = cov_tx;
            variant.outputs[0].amount = amount - base_fee - level;
            out.range_variants.push_back(variant);
            out.range_enf_sigs.push_back(
                SignInput(variant, 0, enf.priv, Semantics::Taproot, enf_flag, view));
        }
    }

    Keystore store;
    store.Put("e", enf.priv);
    DeletionRecord deletion = store.DeleteKey("e", DeletionMethod::Destroy);

    out.hop = CovenantHop{funding,  cov_tx,    l_cov,
                          bound,    enf.pub,   enf_sig,
                          enf_flag, cust.pub,  cust.priv,
                          StrategyCustodialFlag(strategy), deletion};
    return out;
}

FeeStrategyResult ApplyFeeStrategy(ChainState& chain, FeeManagedCovenant& cov, uint64_t add_fee)
{
    FeeStrategyResult result;
    result.attrs = AttributesFor(cov.strategy);
    PrevoutView base_view = ViewOf(cov.hop.funding);

    switch (cov.strategy) {
    case FeeStrategy::FeeInputs:
    case FeeStrategy::UnsecuredFeeInputs: {
        if (cov.strategy == FeeStrategy::FeeInputs && cov.has_dependents) {
            throw UnsafeWithDependents();
        }
        // Add a fee input whose whole value becomes fee; custodians re-sign
        // under ALL, while A1CP||ALL signatures survive unchanged.
        Outpoint fee_coin = chain.Mint(add_fee, Bytes{0xfe});
        Transaction adjusted = cov.hop.cov;
        adjusted.inputs.push_back(TxInput{fee_coin.txid, fee_coin.index, 0xfffffffd, {}});
        Bytes32 fid = fee_coin.txid;
        uint64_t famount = add_fee;
        PrevoutView view = [base_view, fid, famount](const Outpoint& o) -> std::optional<TxOutput> {
            if (o.txid == fid) return TxOutput{famount, Bytes{0xfe}};
            return base_view(o);
        };
        adjusted.witnesses.assign(adjusted.inputs.size(), {});
        adjusted.witnesses[0] = CovWitness(cov, adjusted, cov.hop.enf_sig, view);
        result.txs.push_back(adjusted);
        return result;
    }
    case FeeStrategy::ChangeOutputs: {
        if (cov.has_dependents) throw UnsafeWithDependents();
        Transaction adjusted = cov.hop.cov;
        if (adjusted.outputs[1].amount < add_fee) throw Unsatisfiable("change exhausted");
        adjusted.outputs[1].amount -= add_fee;
        adjusted.witnesses.assign(adjusted.inputs.size(), {});
        adjusted.witnesses[0] = CovWitness(cov, adjusted, cov.hop.enf_sig, base_view);
        result.txs.push_back(adjusted);
        return result;
    }
    case FeeStrategy::CpfpOutputs: {
        Transaction parent = cov.hop.cov;
        parent.witnesses.assign(parent.inputs.size(), {});
        parent.witnesses[0] = CovWitness(cov, parent, cov.hop.enf_sig, base_view);

        // Fee child spends the CPFP output plus a wallet coin; its fee covers
        // itself and the parent.
        Outpoint wallet_coin = chain.Mint(add_fee + 1000, Bytes{0xfe});
        Transaction child;
        Bytes32 parent_id = Txid(parent);
        child.inputs.push_back(TxInput{parent_id, 1, 0xfffffffd, {}});
        child.inputs.push_back(TxInput{wallet_coin.txid, wallet_coin.index, 0xfffffffd, {}});
        child.outputs.push_back(TxOutput{1600 - 600 + (add_fee + 1000) - add_fee - 1000,
                                         Bytes{0xad}});
        // Recompute: child consumes 600 (cpfp) + add_fee + 1000, leaves a
        // token output so everything else is fee.
        child.outputs[0].amount = 100;

        ScriptProgram fee_script;
        ControlBlock fee_cb{NumsInternalKey(), {}};
        Bytes fee_spk = SingleKeyTaprootScript(cov.fee_pub, &fee_script, &fee_cb);
        Transaction parent_copy = parent;
        PrevoutView child_view = [parent_copy, parent_id, wallet_coin,
                                  add_fee](const Outpoint& o) -> std::optional<TxOutput> {
            if (o.txid == parent_id && o.index < parent_copy.outputs.size()) {
                return parent_copy.outputs[o.index];
            }
            if (o.txid == wallet_coin.txid) return TxOutput{add_fee + 1000, Bytes{0xfe}};
            return std::nullopt;
        };
        Signature fee_sig =
            SignInput(child, 0, cov.fee_key, Semantics::Taproot, SIGHASH_ALL, child_view);
        child.witnesses.assign(child.inputs.size(), {});
        child.witnesses[0].push_back(EncodeSigElement(fee_sig, SIGHASH_ALL));
        child.witnesses[0].push_back(fee_script.Serialize());
        child.witnesses[0].push_back(fee_cb.Serialize());

        result.txs.push_back(parent);
        result.txs.push_back(child);
        return result;
    }
    case FeeStrategy::PrepareFeeRange: {
        // Lowest prepared variant whose extra fee covers the requirement.
        for (size_t i = 0; i < cov.range_variants.size(); ++i) {
            uint64_t extra = cov.hop.cov.outputs[0].amount - cov.range_variants[i].outputs[0].amount;
            if (extra >= add_fee || i + 1 == cov.range_variants.size()) {
                Transaction variant = cov.range_variants[i];
                variant.witnesses.assign(variant.inputs.size(), {});
                variant.witnesses[0] =
                    CovWitness(cov, variant, cov.range_enf_sigs[i], base_view);
                result.txs.push_back(variant);
                return result;
            }
        }
        throw Unsatisfiable("no prepared fee variant");
    }
    }
    throw std::logic_error("unreachable strategy");
}

} // namespace covlab

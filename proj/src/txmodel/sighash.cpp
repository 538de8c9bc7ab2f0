// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "txmodel/sighash.h"

#include "crypto/hash.h"

namespace covlab {

namespace {

TxOutput Prevout(const PrevoutView& view, const TxInput& in)
{
    auto o = view(Outpoint{in.prev_txid, in.prev_index});
    if (!o) throw std::runtime_error("prevout view is missing a referenced output");
    return *o;
}

void CommitBytes(TaggedHashWriter& w, const Bytes& b)
{
    w.WriteU32(static_cast<uint32_t>(b.size())).Write(b);
}

void CommitOutput(TaggedHashWriter& w, const TxOutput& o)
{
    w.WriteU64(o.amount);
    CommitBytes(w, o.script);
}

Bytes32 HashAllOutpoints(const Transaction& tx)
{
    TaggedHashWriter w("covlab/outpoints");
    for (const TxInput& in : tx.inputs) w.Write(in.prev_txid).WriteU32(in.prev_index);
    return w.Finalize();
}

Bytes32 HashAllSequences(const Transaction& tx)
{
    TaggedHashWriter w("covlab/sequences");
    for (const TxInput& in : tx.inputs) w.WriteU32(in.sequence);
    return w.Finalize();
}

Bytes32 HashAllOutputs(const Transaction& tx)
{
    TaggedHashWriter w("covlab/outputs");
    for (const TxOutput& o : tx.outputs) CommitOutput(w, o);
    return w.Finalize();
}

Bytes32 HashPrevoutAmounts(const Transaction& tx, const PrevoutView& view)
{
    TaggedHashWriter w("covlab/prevout-amounts");
    for (const TxInput& in : tx.inputs) w.WriteU64(Prevout(view, in).amount);
    return w.Finalize();
}

Bytes32 HashPrevoutScripts(const Transaction& tx, const PrevoutView& view)
{
    TaggedHashWriter w("covlab/prevout-scripts");
    for (const TxInput& in : tx.inputs) CommitBytes(w, Prevout(view, in).script);
    return w.Finalize();
}

// Legacy semantics: per-field commitments following the signature message
// table for P2PK/P2PKH/P2SH/P2MS spends. One deliberate deviation: the
// "other inputs / sequence" entry is committed under plain ALL only, which
// matches deployed behaviour rather than the documented pattern.
void BuildLegacy(TaggedHashWriter& w, const Transaction& tx, size_t idx, SighashFlag flag,
                 const PrevoutView& view)
{
    bool all_inputs = !flag.anyonecanpay;
    const TxInput& cur = tx.inputs[idx];

    w.WriteU32(tx.version);
    if (all_inputs) w.WriteU32(static_cast<uint32_t>(tx.inputs.size()));
    if (all_inputs) w.WriteU32(static_cast<uint32_t>(idx));
    w.Write(cur.prev_txid).WriteU32(cur.prev_index);
    CommitBytes(w, Prevout(view, cur).script);
    w.WriteU32(cur.sequence);
    if (all_inputs) {
        for (size_t i = 0; i < tx.inputs.size(); ++i) {
            if (i == idx) continue;
            const TxInput& in = tx.inputs[i];
            w.WriteU32(static_cast<uint32_t>(i));
            w.Write(in.prev_txid).WriteU32(in.prev_index);
            CommitBytes(w, Prevout(view, in).script);
            if (flag.base == SighashBase::All) w.WriteU32(in.sequence);
        }
    }
    if (all_inputs || flag.base == SighashBase::All) {
        w.WriteU32(static_cast<uint32_t>(tx.outputs.size()));
    }
    if (flag.base != SighashBase::None) {
        if (flag.base == SighashBase::Single && idx >= tx.outputs.size()) {
            throw NoCorrespondingOutput();
        }
        if (idx < tx.outputs.size()) {
            w.WriteU8(1);
            CommitOutput(w, tx.outputs[idx]);
        } else {
            w.WriteU8(0);
        }
    }
    if (flag.base == SighashBase::All) {
        for (size_t i = 0; i < tx.outputs.size(); ++i) {
            if (i == idx) continue;
            w.WriteU32(static_cast<uint32_t>(i));
            CommitOutput(w, tx.outputs[i]);
        }
    }
    w.WriteU32(tx.locktime);
}

// Segregated-witness v0 semantics: hash-aggregated commitments.
void BuildSegwitV0(TaggedHashWriter& w, const Transaction& tx, size_t idx, SighashFlag flag,
                   const PrevoutView& view)
{
    bool all_inputs = !flag.anyonecanpay;
    const TxInput& cur = tx.inputs[idx];
    TxOutput prevout = Prevout(view, cur);

    w.WriteU32(tx.version);
    if (all_inputs) w.Write(HashAllOutpoints(tx));
    if (all_inputs && flag.base == SighashBase::All) w.Write(HashAllSequences(tx));
    if (all_inputs) w.WriteU32(static_cast<uint32_t>(idx));
    w.Write(cur.prev_txid).WriteU32(cur.prev_index);
    CommitBytes(w, prevout.script);
    w.WriteU64(prevout.amount);
    w.WriteU32(cur.sequence);
    if (flag.base != SighashBase::None) {
        if (flag.base == SighashBase::Single && idx >= tx.outputs.size()) {
            throw NoCorrespondingOutput();
        }
        if (idx < tx.outputs.size()) {
            TaggedHashWriter own("covlab/own-output");
            CommitOutput(own, tx.outputs[idx]);
            w.Write(own.Finalize());
        } else {
            w.WriteU8(0);
        }
    }
    if (flag.base == SighashBase::All) w.Write(HashAllOutputs(tx));
    w.WriteU32(tx.locktime);
}

// Taproot semantics; `apoas` additionally removes every reference to the
// previous output's identity so the signature stays valid when the input is
// rebound to a clone output with identical script and amount.
void BuildTaproot(TaggedHashWriter& w, const Transaction& tx, size_t idx, SighashFlag flag,
                  const PrevoutView& view, bool apoas)
{
    bool all_inputs = !flag.anyonecanpay;
    const TxInput& cur = tx.inputs[idx];
    TxOutput prevout = Prevout(view, cur);

    w.WriteU32(tx.version);
    w.WriteU32(tx.locktime);
    if (!apoas && all_inputs) {
        w.Write(HashAllOutpoints(tx));
        w.Write(HashPrevoutAmounts(tx, view));
        w.Write(HashPrevoutScripts(tx, view));
    }
    if (all_inputs) w.Write(HashAllSequences(tx));
    if (flag.base == SighashBase::All) w.Write(HashAllOutputs(tx));
    w.WriteU8(cur.annex ? 1 : 0); // spend type
    if (!apoas) w.Write(cur.prev_txid).WriteU32(cur.prev_index);
    w.WriteU64(prevout.amount);
    CommitBytes(w, prevout.script);
    w.WriteU32(cur.sequence);
    if (all_inputs) w.WriteU32(static_cast<uint32_t>(idx));
    if (cur.annex) CommitBytes(w, *cur.annex);
    if (flag.base == SighashBase::Single) {
        if (idx >= tx.outputs.size()) throw NoCorrespondingOutput();
        TaggedHashWriter own("covlab/own-output");
        CommitOutput(own, tx.outputs[idx]);
        w.Write(own.Finalize());
    }
}

} // namespace

std::string SemanticsName(Semantics s)
{
    switch (s) {
    case Semantics::Legacy: return "legacy";
    case Semantics::SegwitV0: return "segwit_v0";
    case Semantics::Taproot: return "taproot";
    case Semantics::Apoas: return "apoas";
    }
    return "?";
}

std::string FlagName(SighashFlag f)
{
    std::string base;
    switch (f.base) {
    case SighashBase::All: base = "ALL"; break;
    case SighashBase::Single: base = "SINGLE"; break;
    case SighashBase::None: base = "NONE"; break;
    }
    return f.anyonecanpay ? "A1CP||" + base : base;
}

Bytes32 SighashMsg(const Transaction& tx, size_t input_index, Semantics semantics,
                   SighashFlag flag, const PrevoutView& view)
{
    if (input_index >= tx.inputs.size()) throw std::out_of_range("input index out of range");
    TaggedHashWriter w("covlab/sighash/" + SemanticsName(semantics));
    switch (semantics) {
    case Semantics::Legacy: BuildLegacy(w, tx, input_index, flag, view); break;
    case Semantics::SegwitV0: BuildSegwitV0(w, tx, input_index, flag, view); break;
    case Semantics::Taproot: BuildTaproot(w, tx, input_index, flag, view, false); break;
    case Semantics::Apoas: BuildTaproot(w, tx, input_index, flag, view, true); break;
    }
    w.WriteU8(flag.ToByte());
    return w.Finalize();
}

Signature SignInput(const Transaction& tx, size_t input_index, const Scalar& priv,
                    Semantics semantics, SighashFlag flag, const PrevoutView& view)
{
    return Sign(priv, SighashMsg(tx, input_index, semantics, flag, view));
}

bool VerifyInput(const Transaction& tx, size_t input_index, const GroupPoint& pub,
                 const Signature& sig, Semantics semantics, SighashFlag flag,
                 const PrevoutView& view)
{
    return Verify(pub, SighashMsg(tx, input_index, semantics, flag, view), sig);
}

} // namespace covlab

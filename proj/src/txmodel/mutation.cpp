// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "txmodel/mutation.h"

namespace covlab {

const std::vector<TxField>& AllTxFields()
{
    static const std::vector<TxField> fields = {
        TxField::Version,           TxField::AppendInput,
        TxField::CurrentInputPrevout, TxField::CurrentInputSequence,
        TxField::OtherInputPrevout, TxField::OtherInputSequence,
        TxField::OwnOutputValue,    TxField::OwnOutputScript,
        TxField::OtherOutputValue,  TxField::OtherOutputScript,
        TxField::AppendOutput,      TxField::Locktime,
        TxField::Annex,             TxField::Witness,
    };
    return fields;
}

std::string TxFieldName(TxField f)
{
    switch (f) {
    case TxField::Version: return "version";
    case TxField::AppendInput: return "append_input";
    case TxField::CurrentInputPrevout: return "current_input_prevout";
    case TxField::CurrentInputSequence: return "current_input_sequence";
    case TxField::OtherInputPrevout: return "other_input_prevout";
    case TxField::OtherInputSequence: return "other_input_sequence";
    case TxField::OwnOutputValue: return "own_output_value";
    case TxField::OwnOutputScript: return "own_output_script";
    case TxField::OtherOutputValue: return "other_output_value";
    case TxField::OtherOutputScript: return "other_output_script";
    case TxField::AppendOutput: return "append_output";
    case TxField::Locktime: return "locktime";
    case TxField::Annex: return "annex";
    case TxField::Witness: return "witness";
    }
    return "?";
}

std::map<TxField, bool> MutationMatrix(Semantics semantics, SighashFlag flag)
{
    const bool a1cp = flag.anyonecanpay;
    const bool all = flag.base == SighashBase::All;
    const bool none = flag.base == SighashBase::None;

    // committed[f] = at least one table entry covering f is marked Y.
    std::map<TxField, bool> committed;
    committed[TxField::Version] = true;
    committed[TxField::CurrentInputSequence] = true;
    committed[TxField::Locktime] = true;
    committed[TxField::Witness] = false;

    switch (semantics) {
    case Semantics::Legacy:
        committed[TxField::CurrentInputPrevout] = true;
        committed[TxField::AppendInput] = !a1cp;
        committed[TxField::OtherInputPrevout] = !a1cp;
        // Documented deviation from the table's N,N,Y pattern: committed
        // under plain ALL only.
        committed[TxField::OtherInputSequence] = all && !a1cp;
        committed[TxField::OwnOutputValue] = !none;
        committed[TxField::OwnOutputScript] = !none;
        committed[TxField::OtherOutputValue] = all;
        committed[TxField::OtherOutputScript] = all;
        // Output count committed for ALL/SINGLE/NONE/A1CP||ALL.
        committed[TxField::AppendOutput] = !a1cp || all;
        committed[TxField::Annex] = false;
        break;
    case Semantics::SegwitV0:
        committed[TxField::CurrentInputPrevout] = true;
        committed[TxField::AppendInput] = !a1cp;
        committed[TxField::OtherInputPrevout] = !a1cp;
        committed[TxField::OtherInputSequence] = all && !a1cp;
        committed[TxField::OwnOutputValue] = !none;
        committed[TxField::OwnOutputScript] = !none;
        committed[TxField::OtherOutputValue] = all;
        committed[TxField::OtherOutputScript] = all;
        committed[TxField::AppendOutput] = all;
        committed[TxField::Annex] = false;
        break;
    case Semantics::Taproot:
        committed[TxField::CurrentInputPrevout] = true;
        committed[TxField::AppendInput] = !a1cp;
        committed[TxField::OtherInputPrevout] = !a1cp;
        committed[TxField::OtherInputSequence] = !a1cp;
        committed[TxField::OwnOutputValue] = !none;
        committed[TxField::OwnOutputScript] = !none;
        committed[TxField::OtherOutputValue] = all;
        committed[TxField::OtherOutputScript] = all;
        committed[TxField::AppendOutput] = all;
        committed[TxField::Annex] = true;
        break;
    case Semantics::Apoas:
        // The previous-output identity commitments are removed; the clone
        // output's script and amount remain committed via the per-input rows.
        committed[TxField::CurrentInputPrevout] = false;
        committed[TxField::AppendInput] = !a1cp; // via the all-sequences hash
        committed[TxField::OtherInputPrevout] = false;
        committed[TxField::OtherInputSequence] = !a1cp;
        committed[TxField::OwnOutputValue] = !none;
        committed[TxField::OwnOutputScript] = !none;
        committed[TxField::OtherOutputValue] = all;
        committed[TxField::OtherOutputScript] = all;
        committed[TxField::AppendOutput] = all;
        committed[TxField::Annex] = true;
        break;
    }

    std::map<TxField, bool> mutable_fields;
    for (TxField f : AllTxFields()) mutable_fields[f] = !committed.at(f);
    return mutable_fields;
}

} // namespace covlab

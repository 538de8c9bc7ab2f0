// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_TXMODEL_MUTATION_H
#define COVLAB_TXMODEL_MUTATION_H

#include "txmodel/sighash.h"

#include <map>
#include <string>
#include <vector>

namespace covlab {

// Transaction fields a third party could rewrite, at the granularity the
// signature message tables distinguish.
enum class TxField {
    Version,
    AppendInput,
    CurrentInputPrevout,
    CurrentInputSequence,
    OtherInputPrevout,
    OtherInputSequence,
    OwnOutputValue,
    OwnOutputScript,
    OtherOutputValue,
    OtherOutputScript,
    AppendOutput,
    Locktime,
    Annex,
    Witness,
};

const std::vector<TxField>& AllTxFields();
std::string TxFieldName(TxField f);

// field -> mutable? A field is mutable iff every signature of
// (semantics, flag) ignores it.
std::map<TxField, bool> MutationMatrix(Semantics semantics, SighashFlag flag);

} // namespace covlab

#endif // COVLAB_TXMODEL_MUTATION_H

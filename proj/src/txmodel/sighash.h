// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_TXMODEL_SIGHASH_H
#define COVLAB_TXMODEL_SIGHASH_H

#include "crypto/schnorr.h"
#include "txmodel/transaction.h"

#include <stdexcept>
#include <string>

namespace covlab {

class NoCorrespondingOutput : public std::runtime_error
{
public:
    NoCorrespondingOutput() : std::runtime_error("SINGLE requires an output at the input's index") {}
};

enum class SighashBase : uint8_t { All = 1, None = 2, Single = 3 };

struct SighashFlag {
    SighashBase base{SighashBase::All};
    bool anyonecanpay{false};

    uint8_t ToByte() const
    {
        return static_cast<uint8_t>(base) | (anyonecanpay ? 0x80 : 0x00);
    }
    static SighashFlag FromByte(uint8_t b)
    {
        SighashFlag f;
        f.anyonecanpay = (b & 0x80) != 0;
        f.base = static_cast<SighashBase>(b & 0x7f);
        return f;
    }
    bool operator==(const SighashFlag&) const = default;
};

inline const SighashFlag SIGHASH_ALL{SighashBase::All, false};
inline const SighashFlag SIGHASH_SINGLE{SighashBase::Single, false};
inline const SighashFlag SIGHASH_NONE{SighashBase::None, false};
inline const SighashFlag SIGHASH_A1CP_ALL{SighashBase::All, true};
inline const SighashFlag SIGHASH_A1CP_SINGLE{SighashBase::Single, true};
inline const SighashFlag SIGHASH_A1CP_NONE{SighashBase::None, true};

inline const SighashFlag ALL_SIGHASH_FLAGS[6] = {
    SIGHASH_ALL, SIGHASH_SINGLE, SIGHASH_NONE,
    SIGHASH_A1CP_ALL, SIGHASH_A1CP_SINGLE, SIGHASH_A1CP_NONE};

enum class Semantics { Legacy, SegwitV0, Taproot, Apoas };

std::string SemanticsName(Semantics s);
std::string FlagName(SighashFlag f);

// 32-byte digest over exactly the transaction data the given semantics and
// flag commit to. The flag byte itself is part of the committed message.
Bytes32 SighashMsg(const Transaction& tx, size_t input_index, Semantics semantics,
                   SighashFlag flag, const PrevoutView& view);

Signature SignInput(const Transaction& tx, size_t input_index, const Scalar& priv,
                    Semantics semantics, SighashFlag flag, const PrevoutView& view);

bool VerifyInput(const Transaction& tx, size_t input_index, const GroupPoint& pub,
                 const Signature& sig, Semantics semantics, SighashFlag flag,
                 const PrevoutView& view);

} // namespace covlab

#endif // COVLAB_TXMODEL_SIGHASH_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_TXMODEL_TRANSACTION_H
#define COVLAB_TXMODEL_TRANSACTION_H

#include "crypto/bytes.h"

#include <compare>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

namespace covlab {

// Sequence values below this signal replace-by-fee; relative-lock
// interpretation additionally requires version >= 2 and a cleared disable
// bit (values below 0x80000000 encode the lock).
constexpr uint32_t SEQUENCE_FINAL = 0xffffffff;
constexpr uint32_t RBF_THRESHOLD = 0xfffffffe;
constexpr uint32_t RELATIVE_LOCK_DISABLE = 0x80000000;

struct TxInput {
    Bytes32 prev_txid{};
    uint32_t prev_index{0};
    uint32_t sequence{SEQUENCE_FINAL};
    std::optional<Bytes> annex{}; // opaque; committed by taproot signatures when present

    auto operator<=>(const TxInput&) const = default;
};

struct TxOutput {
    uint64_t amount{0};
    Bytes script{}; // for P2TR: version byte 1 plus the 32-byte output key

    auto operator<=>(const TxOutput&) const = default;
};

using WitnessStack = std::vector<Bytes>;

struct Transaction {
    uint32_t version{2};
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;
    std::vector<WitnessStack> witnesses; // one per input when used
    uint32_t locktime{0};

    bool operator==(const Transaction&) const = default;
};

struct Outpoint {
    Bytes32 txid{};
    uint32_t index{0};

    auto operator<=>(const Outpoint&) const = default;
};

// Supplies the outputs referenced by transaction inputs.
using PrevoutView = std::function<std::optional<TxOutput>(const Outpoint&)>;

// Canonical serialization of the transaction's effects (witnesses excluded).
Bytes SerializeEffects(const Transaction& tx);

// Canonical serialization including witnesses; its length is the
// transaction's size for fee purposes.
Bytes Serialize(const Transaction& tx);

Transaction Parse(const Bytes& data);

size_t TxSize(const Transaction& tx);

// Hash of the canonical effects serialization.
Bytes32 Txid(const Transaction& tx);

// Relative lock encoded in a sequence value, when the thresholds permit one.
std::optional<uint32_t> DecodeRelativeLock(uint32_t version, uint32_t sequence);
bool SignalsRbf(const Transaction& tx);

// P2TR-style output script for a 32-byte output key x coordinate.
Bytes TaprootScript(const Bytes32& output_key_x);
std::optional<Bytes32> TaprootScriptKey(const Bytes& script);

nlohmann::ordered_json TxToJson(const Transaction& tx);
Transaction TxFromJson(const nlohmann::json& j);

} // namespace covlab

#endif // COVLAB_TXMODEL_TRANSACTION_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_ANALYSIS_OBSERVER_H
#define COVLAB_ANALYSIS_OBSERVER_H

#include "chainsim/chain.h"

#include <json.hpp>

namespace covlab {

/** On-chain output-sequence pattern detector. Sees only public data:
 *  witnesses, revealed scripts and control blocks. */
struct SequenceDetection {
    Bytes32 deposit_txid{};    // spends a receive output (2-of-2 reveal)
    Bytes32 withdrawal_txid{}; // spends the vault output (4-key reveal)
    Bytes32 final_txid{};      // time-locked spend or enforcement reject
    bool reject{false};        // final spend re-used the enforcement keys
    uint32_t revealed_timelock{0};
};

struct CorrelationEdge {
    std::string kind; // same-sequence | change-reuse | enforcement-key-reuse | internal-key-reuse
    Outpoint a, b;
};

struct CorrelationGraph {
    std::vector<Outpoint> nodes;
    std::vector<CorrelationEdge> edges;
    std::map<Outpoint, int> cluster;
};

struct ScanResult {
    std::vector<SequenceDetection> sequences;
    CorrelationGraph graph;

    nlohmann::ordered_json ToJson() const;
};

// Flags output chains whose revealed scripts follow the
// receive -> vault -> unvault transition shapes. Edges are added for change
// reuse, enforcement-key reuse within a sequence, and shared internal keys
// across sequences.
ScanResult ObserverScan(const ChainState& chain);

} // namespace covlab

#endif // COVLAB_ANALYSIS_OBSERVER_H

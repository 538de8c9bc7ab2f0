// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CHAINSIM_CHAIN_H
#define COVLAB_CHAINSIM_CHAIN_H

#include "script/interpreter.h"
#include "taproot/taptree.h"
#include "txmodel/transaction.h"

#include <json.hpp>

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace covlab {

struct ChainConfig {
    uint64_t min_relay_feerate{1};   // sat per serialized byte
    size_t block_size_limit{100000}; // bytes
    bool ctv_enabled{false};
    bool inspect_enabled{false};
};

enum class RejectReason {
    DoubleSpend,
    BadWitness,
    PrematureLock,
    FeeTooLow,
    MissingInput,
    NotSignaling,
    FeeNotHigher,
    Immutable,
    Malformed,
};

std::string RejectReasonName(RejectReason r);

struct SubmitResult {
    bool accepted{false};
    RejectReason reason{RejectReason::Malformed};
    std::string detail;

    static SubmitResult Accept() { return {true, RejectReason::Malformed, ""}; }
    static SubmitResult Reject(RejectReason r, std::string detail = "")
    {
        return {false, r, std::move(detail)};
    }
};

struct Block {
    uint64_t height{0};
    std::vector<Transaction> transactions;
    uint64_t total_fees{0};
};

struct MempoolEntry {
    Transaction tx;
    Bytes32 txid;
    uint64_t fee{0};
    size_t size{0};
    uint64_t sequence{0}; // arrival order for deterministic tie-breaks
};

struct ChainEvent {
    uint64_t height;
    std::string event;
    std::string txid;
    std::string detail;

    nlohmann::ordered_json ToJson() const;
};

/** Single authoritative chain view: UTXO set, mempool with replacement, fee
 *  market, and greedy package-aware block building. Deterministic for a given
 *  submission sequence. */
class ChainState
{
public:
    explicit ChainState(ChainConfig config = {});

    const ChainConfig& config() const { return m_config; }
    uint64_t Height() const { return m_height; }

    // Mints a spendable output outside normal validation (funding source for
    // scenarios). The coin is placed directly in the UTXO set at the current
    // height.
    Outpoint Mint(uint64_t amount, const Bytes& script);

    std::optional<TxOutput> LookupUtxo(const Outpoint& out) const;
    const std::map<Outpoint, TxOutput>& Utxos() const { return m_utxos; }
    PrevoutView UtxoView() const;

    // Height of the block containing the output's creating transaction.
    std::optional<uint64_t> InclusionHeight(const Bytes32& txid) const;

    // tip height - inclusion height; 0 for a just-mined output.
    std::optional<uint64_t> ConfirmedAge(const Bytes32& txid) const;

    // 0 if unconfirmed; else height - inclusion height + 1.
    uint64_t Confirmations(const Bytes32& txid) const;

    SubmitResult Submit(const Transaction& tx);
    // Evaluates a package together: fees and the relay floor apply to the
    // aggregate, so a child can pay for its parent.
    SubmitResult SubmitPackage(const std::vector<Transaction>& txs);
    SubmitResult Replace(const Transaction& new_tx);

    Block MineBlock();
    void MineBlocks(size_t n);

    bool InMempool(const Bytes32& txid) const;
    size_t MempoolSize() const { return m_mempool.size(); }

    // Adversary events. A fee spike raises the mempool's dynamic entry floor
    // to `level` while competing traffic lasts; queued transactions below the
    // floor are evicted. The spike burns adversary budget per block; when the
    // budget runs out the spike collapses early.
    void FeeSpike(uint64_t level, uint64_t duration_blocks);
    void SetAdversaryFeeBudget(uint64_t sats) { m_adversary_budget = sats; }
    uint64_t AdversaryFeeBudget() const { return m_adversary_budget; }
    uint64_t CurrentFeeFloor() const;

    // Pinning: replaces `target` with a junk-inflated variant of minimally
    // higher absolute fee. Requires the target to signal replaceability and
    // to carry a signature set that leaves other inputs mutable.
    SubmitResult Pin(const Bytes32& target_txid, size_t junk_bytes,
                     const std::function<bool(const Transaction&)>& mutability_check);

    const std::vector<Block>& Blocks() const { return m_blocks; }
    const std::vector<ChainEvent>& EventLog() const { return m_events; }
    std::string EventLogLines() const;

    // Audit invariants: conservation per block, no premature CSV in any
    // block, and incremental UTXO state equal to a replay.
    bool AuditConservation() const;
    bool AuditNoCsvViolation() const;
    bool AuditUtxoReplay() const;

private:
    struct SpikeState {
        uint64_t level{0};
        uint64_t blocks_remaining{0};
    };

    uint64_t TxFee(const Transaction& tx, const PrevoutView& view) const;
    SubmitResult ValidateForMempool(const Transaction& tx, uint64_t* fee_out,
                                    bool allow_mempool_parents) const;
    SubmitResult CheckWitnesses(const Transaction& tx, const PrevoutView& view) const;
    void EvictBelowFloor();
    void Log(const std::string& event, const Bytes32& txid, const std::string& detail);
    void LogPlain(const std::string& event, const std::string& detail);
    std::vector<Bytes32> MempoolAncestors(const Bytes32& txid) const;

    ChainConfig m_config;
    uint64_t m_height{0};
    std::vector<Block> m_blocks;
    std::map<Outpoint, TxOutput> m_utxos;
    std::map<Outpoint, TxOutput> m_all_outputs; // every output ever created
    std::map<Bytes32, uint64_t> m_inclusion_height; // txid -> block height
    std::map<Bytes32, MempoolEntry> m_mempool;
    std::map<Outpoint, Bytes32> m_mempool_spends; // outpoint -> spender txid
    uint64_t m_mempool_sequence{0};
    SpikeState m_spike;
    uint64_t m_adversary_budget{0};
    bool m_budget_limited{false};
    std::vector<ChainEvent> m_events;
    uint64_t m_mint_counter{0};
};

} // namespace covlab

#endif // COVLAB_CHAINSIM_CHAIN_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "chainsim/chain.h"

#include "crypto/hash.h"

#include <algorithm>
#include <set>

namespace covlab {

namespace {

struct MintRecord {
    Outpoint outpoint;
    TxOutput output;
    uint64_t height;
};

} // namespace

std::string RejectReasonName(RejectReason r)
{
    switch (r) {
    case RejectReason::DoubleSpend: return "DoubleSpend";
    case RejectReason::BadWitness: return "BadWitness";
    case RejectReason::PrematureLock: return "PrematureLock";
    case RejectReason::FeeTooLow: return "FeeTooLow";
    case RejectReason::MissingInput: return "MissingInput";
    case RejectReason::NotSignaling: return "NotSignaling";
    case RejectReason::FeeNotHigher: return "FeeNotHigher";
    case RejectReason::Immutable: return "Immutable";
    case RejectReason::Malformed: return "Malformed";
    }
    return "?";
}

nlohmann::ordered_json ChainEvent::ToJson() const
{
    nlohmann::ordered_json j;
    j["height"] = height;
    j["event"] = event;
    j["txid"] = txid;
    j["detail"] = detail;
    return j;
}

ChainState::ChainState(ChainConfig config) : m_config(config) {}

void ChainState::Log(const std::string& event, const Bytes32& txid, const std::string& detail)
{
    m_events.push_back(ChainEvent{m_height, event, HexStr(txid), detail});
}

void ChainState::LogPlain(const std::string& event, const std::string& detail)
{
    m_events.push_back(ChainEvent{m_height, event, "", detail});
}

Outpoint ChainState::Mint(uint64_t amount, const Bytes& script)
{
    Bytes32 txid = TaggedHashWriter("covlab/mint").WriteU64(m_mint_counter++).Finalize();
    Outpoint out{txid, 0};
    m_utxos[out] = TxOutput{amount, script};
    m_all_outputs[out] = TxOutput{amount, script};
    m_inclusion_height[txid] = m_height;
    Log("mint", txid, "amount=" + std::to_string(amount));
    return out;
}

std::optional<TxOutput> ChainState::LookupUtxo(const Outpoint& out) const
{
    auto it = m_utxos.find(out);
    if (it == m_utxos.end()) return std::nullopt;
    return it->second;
}

PrevoutView ChainState::UtxoView() const
{
    return [this](const Outpoint& out) -> std::optional<TxOutput> {
        auto coin = LookupUtxo(out);
        if (coin) return coin;
        // Resolve in-mempool parents for packages.
        auto it = m_mempool.find(out.txid);
        if (it != m_mempool.end() && out.index < it->second.tx.outputs.size()) {
            return it->second.tx.outputs[out.index];
        }
        return std::nullopt;
    };
}

std::optional<uint64_t> ChainState::InclusionHeight(const Bytes32& txid) const
{
    auto it = m_inclusion_height.find(txid);
    if (it == m_inclusion_height.end()) return std::nullopt;
    return it->second;
}

std::optional<uint64_t> ChainState::ConfirmedAge(const Bytes32& txid) const
{
    auto h = InclusionHeight(txid);
    if (!h) return std::nullopt;
    return m_height - *h;
}

uint64_t ChainState::Confirmations(const Bytes32& txid) const
{
    auto h = InclusionHeight(txid);
    if (!h) return 0;
    return m_height - *h + 1;
}

uint64_t ChainState::CurrentFeeFloor() const
{
    if (m_spike.blocks_remaining > 0) {
        return std::max<uint64_t>(m_config.min_relay_feerate, m_spike.level);
    }
    return m_config.min_relay_feerate;
}

uint64_t ChainState::TxFee(const Transaction& tx, const PrevoutView& view) const
{
    uint64_t in_sum = 0;
    for (const TxInput& in : tx.inputs) {
        auto prevout = view(Outpoint{in.prev_txid, in.prev_index});
        if (!prevout) throw std::runtime_error("fee of transaction with unknown input");
        in_sum += prevout->amount;
    }
    uint64_t out_sum = 0;
    for (const TxOutput& o : tx.outputs) out_sum += o.amount;
    if (out_sum > in_sum) throw std::runtime_error("outputs exceed inputs");
    return in_sum - out_sum;
}

SubmitResult ChainState::CheckWitnesses(const Transaction& tx, const PrevoutView& view) const
{
    for (size_t i = 0; i < tx.inputs.size(); ++i) {
        const TxInput& in = tx.inputs[i];
        auto prevout = view(Outpoint{in.prev_txid, in.prev_index});
        if (!prevout) return SubmitResult::Reject(RejectReason::MissingInput);
        auto output_key = TaprootScriptKey(prevout->script);
        if (!output_key) continue; // non-taproot funding stubs are freely spendable
        if (i >= tx.witnesses.size() || tx.witnesses[i].size() < 2) {
            return SubmitResult::Reject(RejectReason::BadWitness, "missing script-path witness");
        }
        const WitnessStack& w = tx.witnesses[i];
        auto control = ControlBlock::Parse(w.back());
        if (!control) return SubmitResult::Reject(RejectReason::BadWitness, "bad control block");
        auto script = ScriptProgram::Parse(w[w.size() - 2]);
        if (!script) return SubmitResult::Reject(RejectReason::BadWitness, "bad script encoding");
        TapLeaf leaf;
        leaf.script = *script;
        if (!VerifyControlBlock(*output_key, leaf, *control)) {
            return SubmitResult::Reject(RejectReason::BadWitness, "control block mismatch");
        }
        ExecContext ctx;
        auto age = ConfirmedAge(in.prev_txid);
        ctx.confirmed_age = age ? static_cast<uint32_t>(*age) : 0;
        ctx.tx = &tx;
        ctx.input_index = i;
        ctx.prevouts = view;
        ctx.ctv_enabled = m_config.ctv_enabled;
        ctx.inspect_enabled = m_config.inspect_enabled;
        Witness stack;
        stack.elements.assign(w.begin(), w.end() - 2);
        ExecResult result = Execute(leaf.script, stack, ctx);
        if (!result.accepted) {
            if (result.reason == REJECT_PREMATURE_LOCK) {
                return SubmitResult::Reject(RejectReason::PrematureLock, result.reason);
            }
            return SubmitResult::Reject(RejectReason::BadWitness, result.reason);
        }
    }
    return SubmitResult::Accept();
}

SubmitResult ChainState::ValidateForMempool(const Transaction& tx, uint64_t* fee_out,
                                            bool allow_mempool_parents) const
{
    if (tx.inputs.empty() || tx.outputs.empty()) {
        return SubmitResult::Reject(RejectReason::Malformed, "needs >=1 input and >=1 output");
    }
    PrevoutView view = UtxoView();
    uint64_t in_sum = 0;
    for (const TxInput& in : tx.inputs) {
        Outpoint out{in.prev_txid, in.prev_index};
        auto spender = m_mempool_spends.find(out);
        if (spender != m_mempool_spends.end()) {
            return SubmitResult::Reject(RejectReason::DoubleSpend, "outpoint spent in mempool");
        }
        auto coin = LookupUtxo(out);
        if (!coin) {
            auto parent = m_mempool.find(in.prev_txid);
            bool in_mempool =
                parent != m_mempool.end() && in.prev_index < parent->second.tx.outputs.size();
            if (in_mempool && allow_mempool_parents) {
                coin = parent->second.tx.outputs[in.prev_index];
            } else if (m_inclusion_height.count(in.prev_txid)) {
                return SubmitResult::Reject(RejectReason::DoubleSpend, "outpoint already spent");
            } else {
                return SubmitResult::Reject(RejectReason::MissingInput);
            }
        }
        in_sum += coin->amount;
        // Relative locks must already be satisfiable at the next block.
        auto lock = DecodeRelativeLock(tx.version, in.sequence);
        if (lock && *lock > 0) {
            auto age = ConfirmedAge(in.prev_txid);
            if (!age || *age < *lock) {
                return SubmitResult::Reject(RejectReason::PrematureLock,
                                            "relative lock not expired");
            }
        }
    }
    uint64_t out_sum = 0;
    for (const TxOutput& o : tx.outputs) out_sum += o.amount;
    if (out_sum > in_sum) {
        return SubmitResult::Reject(RejectReason::Malformed, "creates more than it consumes");
    }
    SubmitResult wit = CheckWitnesses(tx, view);
    if (!wit.accepted) return wit;
    uint64_t fee = in_sum - out_sum;
    if (fee_out) *fee_out = fee;
    return SubmitResult::Accept();
}

SubmitResult ChainState::Submit(const Transaction& tx)
{
    Bytes32 txid = Txid(tx);
    if (m_mempool.count(txid) || m_inclusion_height.count(txid)) {
        return SubmitResult::Reject(RejectReason::DoubleSpend, "already known");
    }
    uint64_t fee = 0;
    SubmitResult r = ValidateForMempool(tx, &fee, true);
    if (!r.accepted) {
        Log("reject", txid, RejectReasonName(r.reason));
        return r;
    }
    size_t size = TxSize(tx);
    if (fee < size * CurrentFeeFloor()) {
        Log("reject", txid, "FeeTooLow");
        return SubmitResult::Reject(RejectReason::FeeTooLow,
                                    "fee " + std::to_string(fee) + " below floor");
    }
    MempoolEntry entry{tx, txid, fee, size, m_mempool_sequence++};
    for (const TxInput& in : tx.inputs) m_mempool_spends[{in.prev_txid, in.prev_index}] = txid;
    m_mempool.emplace(txid, std::move(entry));
    Log("accept", txid, "fee=" + std::to_string(fee));
    return SubmitResult::Accept();
}

SubmitResult ChainState::SubmitPackage(const std::vector<Transaction>& txs)
{
    // Validate in order, allowing in-package parents; fees and the floor
    // apply to the aggregate.
    uint64_t total_fee = 0;
    size_t total_size = 0;
    std::vector<Bytes32> ids;
    std::vector<uint64_t> fees;
    // Temporarily stage entries so later members see earlier outputs.
    std::vector<Bytes32> staged;
    auto unstage = [&]() {
        for (const Bytes32& id : staged) {
            auto it = m_mempool.find(id);
            if (it != m_mempool.end()) {
                for (const TxInput& in : it->second.tx.inputs) {
                    m_mempool_spends.erase({in.prev_txid, in.prev_index});
                }
                m_mempool.erase(it);
            }
        }
    };
    for (const Transaction& tx : txs) {
        Bytes32 txid = Txid(tx);
        if (m_mempool.count(txid) || m_inclusion_height.count(txid)) {
            unstage();
            return SubmitResult::Reject(RejectReason::DoubleSpend, "already known");
        }
        uint64_t fee = 0;
        SubmitResult r = ValidateForMempool(tx, &fee, true);
        if (!r.accepted) {
            unstage();
            Log("reject-package", txid, RejectReasonName(r.reason));
            return r;
        }
        size_t size = TxSize(tx);
        MempoolEntry entry{tx, txid, fee, size, m_mempool_sequence++};
        for (const TxInput& in : tx.inputs) m_mempool_spends[{in.prev_txid, in.prev_index}] = txid;
        m_mempool.emplace(txid, std::move(entry));
        staged.push_back(txid);
        ids.push_back(txid);
        fees.push_back(fee);
        total_fee += fee;
        total_size += size;
    }
    if (total_fee < total_size * CurrentFeeFloor()) {
        unstage();
        LogPlain("reject-package", "package fee below floor");
        return SubmitResult::Reject(RejectReason::FeeTooLow, "package fee below floor");
    }
    for (size_t i = 0; i < ids.size(); ++i) {
        Log("accept", ids[i], "fee=" + std::to_string(fees[i]) + " (package)");
    }
    return SubmitResult::Accept();
}

SubmitResult ChainState::Replace(const Transaction& new_tx)
{
    std::set<Bytes32> conflicts;
    for (const TxInput& in : new_tx.inputs) {
        auto it = m_mempool_spends.find({in.prev_txid, in.prev_index});
        if (it != m_mempool_spends.end()) conflicts.insert(it->second);
    }
    if (conflicts.empty()) return Submit(new_tx);

    uint64_t replaced_fee = 0;
    for (const Bytes32& id : conflicts) {
        const MempoolEntry& e = m_mempool.at(id);
        if (!SignalsRbf(e.tx)) {
            return SubmitResult::Reject(RejectReason::NotSignaling,
                                        "conflict does not signal replaceability");
        }
        replaced_fee += e.fee;
    }

    // Evict conflicts and their descendants, then validate the replacement.
    std::vector<Bytes32> to_remove(conflicts.begin(), conflicts.end());
    std::set<Bytes32> removed;
    while (!to_remove.empty()) {
        Bytes32 id = to_remove.back();
        to_remove.pop_back();
        if (!removed.insert(id).second) continue;
        auto it = m_mempool.find(id);
        if (it == m_mempool.end()) continue;
        for (size_t o = 0; o < it->second.tx.outputs.size(); ++o) {
            auto child = m_mempool_spends.find({id, static_cast<uint32_t>(o)});
            if (child != m_mempool_spends.end()) to_remove.push_back(child->second);
        }
    }
    // Stash evicted entries in case the replacement fails.
    std::vector<MempoolEntry> stash;
    for (const Bytes32& id : removed) {
        auto it = m_mempool.find(id);
        if (it == m_mempool.end()) continue;
        stash.push_back(it->second);
        for (const TxInput& in : it->second.tx.inputs) {
            m_mempool_spends.erase({in.prev_txid, in.prev_index});
        }
        m_mempool.erase(it);
    }
    auto restore = [&]() {
        for (MempoolEntry& e : stash) {
            for (const TxInput& in : e.tx.inputs) {
                m_mempool_spends[{in.prev_txid, in.prev_index}] = e.txid;
            }
            m_mempool.emplace(e.txid, e);
        }
    };

    uint64_t fee = 0;
    SubmitResult r = ValidateForMempool(new_tx, &fee, true);
    if (!r.accepted) {
        restore();
        return r;
    }
    size_t size = TxSize(new_tx);
    if (fee <= replaced_fee) {
        restore();
        return SubmitResult::Reject(RejectReason::FeeNotHigher, "absolute fee not higher");
    }
    if (fee < replaced_fee + size * m_config.min_relay_feerate) {
        restore();
        return SubmitResult::Reject(RejectReason::FeeNotHigher,
                                    "replacement does not pay for its own relay");
    }
    Bytes32 txid = Txid(new_tx);
    MempoolEntry entry{new_tx, txid, fee, size, m_mempool_sequence++};
    for (const TxInput& in : new_tx.inputs) m_mempool_spends[{in.prev_txid, in.prev_index}] = txid;
    m_mempool.emplace(txid, std::move(entry));
    Log("replace", txid, "evicted=" + std::to_string(removed.size()));
    return SubmitResult::Accept();
}

std::vector<Bytes32> ChainState::MempoolAncestors(const Bytes32& txid) const
{
    std::vector<Bytes32> out;
    std::set<Bytes32> seen;
    std::vector<Bytes32> queue{txid};
    while (!queue.empty()) {
        Bytes32 id = queue.back();
        queue.pop_back();
        auto it = m_mempool.find(id);
        if (it == m_mempool.end()) continue;
        for (const TxInput& in : it->second.tx.inputs) {
            if (m_mempool.count(in.prev_txid) && seen.insert(in.prev_txid).second) {
                out.push_back(in.prev_txid);
                queue.push_back(in.prev_txid);
            }
        }
    }
    return out;
}

Block ChainState::MineBlock()
{
    // Spike accounting: competing traffic must be paid for, block by block.
    bool spike_active = false;
    if (m_spike.blocks_remaining > 0) {
        uint64_t cost = m_spike.level * static_cast<uint64_t>(m_config.block_size_limit);
        if (m_budget_limited && m_adversary_budget < cost) {
            LogPlain("fee-spike-collapsed", "adversary budget exhausted");
            m_spike.blocks_remaining = 0;
        } else {
            if (m_budget_limited) m_adversary_budget -= cost;
            spike_active = true;
        }
    }

    std::set<Bytes32> selected;
    std::vector<Bytes32> ordered;
    size_t used = 0;
    for (;;) {
        // Best remaining ancestor package by feerate; ties break on txid.
        bool found = false;
        Bytes32 best_id{};
        uint64_t best_fee = 0;
        size_t best_size = 0;
        std::vector<Bytes32> best_members;
        for (const auto& [id, entry] : m_mempool) {
            if (selected.count(id)) continue;
            uint64_t pkg_fee = entry.fee;
            size_t pkg_size = entry.size;
            std::vector<Bytes32> members;
            bool ok = true;
            for (const Bytes32& anc : MempoolAncestors(id)) {
                if (selected.count(anc)) continue;
                const MempoolEntry& ae = m_mempool.at(anc);
                pkg_fee += ae.fee;
                pkg_size += ae.size;
                members.push_back(anc);
            }
            if (!ok) continue;
            members.push_back(id);
            if (used + pkg_size > m_config.block_size_limit) continue;
            if (spike_active && pkg_fee <= m_spike.level * static_cast<uint64_t>(pkg_size)) {
                continue; // outbid by competing traffic
            }
            if (!found ||
                pkg_fee * static_cast<uint64_t>(best_size) >
                    best_fee * static_cast<uint64_t>(pkg_size) ||
                (pkg_fee * static_cast<uint64_t>(best_size) ==
                     best_fee * static_cast<uint64_t>(pkg_size) &&
                 id < best_id)) {
                found = true;
                best_id = id;
                best_fee = pkg_fee;
                best_size = pkg_size;
                best_members = members;
            }
        }
        if (!found) break;
        // Parents precede children: stable topological insertion.
        std::vector<Bytes32> pending = best_members;
        while (!pending.empty()) {
            bool progressed = false;
            for (auto it = pending.begin(); it != pending.end();) {
                const MempoolEntry& e = m_mempool.at(*it);
                bool ready = true;
                for (const TxInput& in : e.tx.inputs) {
                    if (m_mempool.count(in.prev_txid) && !selected.count(in.prev_txid)) {
                        ready = false;
                        break;
                    }
                }
                if (ready) {
                    selected.insert(*it);
                    ordered.push_back(*it);
                    it = pending.erase(it);
                    progressed = true;
                } else {
                    ++it;
                }
            }
            if (!progressed) break; // cycle cannot happen; guard anyway
        }
        used += best_size;
    }

    Block block;
    block.height = m_height + 1;
    for (const Bytes32& id : ordered) {
        const MempoolEntry& e = m_mempool.at(id);
        block.transactions.push_back(e.tx);
        block.total_fees += e.fee;
    }

    // Connect the block.
    m_height += 1;
    for (const Transaction& tx : block.transactions) {
        Bytes32 id = Txid(tx);
        for (const TxInput& in : tx.inputs) {
            m_utxos.erase({in.prev_txid, in.prev_index});
            m_mempool_spends.erase({in.prev_txid, in.prev_index});
        }
        for (size_t o = 0; o < tx.outputs.size(); ++o) {
            m_utxos[{id, static_cast<uint32_t>(o)}] = tx.outputs[o];
            m_all_outputs[{id, static_cast<uint32_t>(o)}] = tx.outputs[o];
        }
        m_inclusion_height[id] = m_height;
        m_mempool.erase(id);
        Log("confirm", id, "height=" + std::to_string(m_height));
    }
    m_blocks.push_back(block);
    LogPlain("block", "txs=" + std::to_string(block.transactions.size()) +
                          (spike_active ? " spike" : ""));
    if (spike_active) m_spike.blocks_remaining -= 1;
    return block;
}

void ChainState::MineBlocks(size_t n)
{
    for (size_t i = 0; i < n; ++i) MineBlock();
}

bool ChainState::InMempool(const Bytes32& txid) const { return m_mempool.count(txid) > 0; }

void ChainState::FeeSpike(uint64_t level, uint64_t duration_blocks)
{
    m_budget_limited = m_adversary_budget > 0;
    m_spike.level = level;
    m_spike.blocks_remaining = duration_blocks;
    LogPlain("fee-spike", "level=" + std::to_string(level) +
                              " blocks=" + std::to_string(duration_blocks));
    EvictBelowFloor();
}

void ChainState::EvictBelowFloor()
{
    uint64_t floor = CurrentFeeFloor();
    std::vector<Bytes32> evict;
    for (const auto& [id, entry] : m_mempool) {
        if (entry.fee < floor * static_cast<uint64_t>(entry.size)) evict.push_back(id);
    }
    for (const Bytes32& id : evict) {
        auto it = m_mempool.find(id);
        if (it == m_mempool.end()) continue;
        for (const TxInput& in : it->second.tx.inputs) {
            m_mempool_spends.erase({in.prev_txid, in.prev_index});
        }
        Log("evict", id, "below dynamic fee floor");
        m_mempool.erase(it);
    }
}

SubmitResult ChainState::Pin(const Bytes32& target_txid, size_t junk_bytes,
                             const std::function<bool(const Transaction&)>& mutability_check)
{
    auto it = m_mempool.find(target_txid);
    if (it == m_mempool.end()) {
        return SubmitResult::Reject(RejectReason::MissingInput, "target not in mempool");
    }
    const Transaction& target = it->second.tx;
    if (!SignalsRbf(target)) {
        return SubmitResult::Reject(RejectReason::NotSignaling, "target does not signal");
    }
    if (!mutability_check(target)) {
        return SubmitResult::Reject(RejectReason::Immutable,
                                    "signature set commits to the input list");
    }
    // Junk input: low value, large witness.
    uint64_t old_fee = it->second.fee;
    uint64_t needed = TxSize(target) * m_config.min_relay_feerate + junk_bytes + old_fee + 1;
    Bytes junk_script{0xfe}; // non-taproot stub, freely spendable
    Outpoint junk = Mint(needed, junk_script);
    Transaction pinned = target;
    TxInput in;
    in.prev_txid = junk.txid;
    in.prev_index = junk.index;
    in.sequence = 0xfffffffd;
    pinned.inputs.push_back(in);
    pinned.witnesses.resize(pinned.inputs.size());
    pinned.witnesses.back().push_back(Bytes(junk_bytes, 0x5a));
    SubmitResult r = Replace(pinned);
    if (r.accepted) Log("pin", Txid(pinned), "junk_bytes=" + std::to_string(junk_bytes));
    return r;
}

std::string ChainState::EventLogLines() const
{
    std::string out;
    for (const ChainEvent& e : m_events) {
        out += e.ToJson().dump();
        out += '\n';
    }
    return out;
}

bool ChainState::AuditConservation() const
{
    for (const Block& b : m_blocks) {
        uint64_t fees = 0;
        for (const Transaction& tx : b.transactions) {
            uint64_t in_sum = 0;
            for (const TxInput& in : tx.inputs) {
                auto it = m_all_outputs.find({in.prev_txid, in.prev_index});
                if (it == m_all_outputs.end()) return false;
                in_sum += it->second.amount;
            }
            uint64_t out_sum = 0;
            for (const TxOutput& o : tx.outputs) out_sum += o.amount;
            if (out_sum > in_sum) return false;
            fees += in_sum - out_sum;
        }
        if (fees != b.total_fees) return false;
    }
    return true;
}

bool ChainState::AuditNoCsvViolation() const
{
    for (const Block& b : m_blocks) {
        for (const Transaction& tx : b.transactions) {
            for (const TxInput& in : tx.inputs) {
                auto lock = DecodeRelativeLock(tx.version, in.sequence);
                if (!lock || *lock == 0) continue;
                auto it = m_inclusion_height.find(in.prev_txid);
                if (it == m_inclusion_height.end()) return false;
                // Age measured at the tip the block was built on.
                if (b.height - it->second < *lock + 1) return false;
            }
        }
    }
    return true;
}

bool ChainState::AuditUtxoReplay() const
{
    // Seed with every minted coin, then replay all blocks in order.
    std::map<Outpoint, TxOutput> replay;
    for (uint64_t i = 0; i < m_mint_counter; ++i) {
        Bytes32 txid = TaggedHashWriter("covlab/mint").WriteU64(i).Finalize();
        auto it = m_all_outputs.find({txid, 0});
        if (it == m_all_outputs.end()) return false;
        replay[{txid, 0}] = it->second;
    }
    for (const Block& b : m_blocks) {
        for (const Transaction& tx : b.transactions) {
            Bytes32 id = Txid(tx);
            for (const TxInput& in : tx.inputs) {
                if (!replay.erase({in.prev_txid, in.prev_index})) return false;
            }
            for (size_t o = 0; o < tx.outputs.size(); ++o) {
                replay[{id, static_cast<uint32_t>(o)}] = tx.outputs[o];
            }
        }
    }
    if (replay.size() != m_utxos.size()) return false;
    for (const auto& [out, coin] : m_utxos) {
        auto it = replay.find(out);
        if (it == replay.end() || !(it->second == coin)) return false;
    }
    return true;
}

} // namespace covlab

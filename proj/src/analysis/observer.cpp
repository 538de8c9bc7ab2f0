// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "analysis/observer.h"

#include "taproot/taptree.h"

#include <map>

namespace covlab {

namespace {

enum class RevealKind { Other, ReceivePair, WithdrawQuad, TimelockSpend, EnforcementTriple };

struct Reveal {
    RevealKind kind{RevealKind::Other};
    std::vector<GroupPoint> keys;
    uint32_t timelock{0};
    Bytes internal_key; // 33-byte serialization from the control block
};

bool IsKeyCheck(const Instruction& push, const Instruction& check, Opcode expected)
{
    return push.op == Opcode::PushKey && check.op == expected;
}

// Classifies a revealed leaf script by its instruction shape.
Reveal Classify(const ScriptProgram& script)
{
    Reveal out;
    const auto& ins = script.instructions;
    // 2-of-2: K CHECKSIGVERIFY K CHECKSIG
    if (ins.size() == 4 && IsKeyCheck(ins[0], ins[1], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[2], ins[3], Opcode::CheckSig)) {
        out.kind = RevealKind::ReceivePair;
        out.keys = script.PushedKeys();
        return out;
    }
    // 4-of-4: K CSV K CSV K CSV K CHECKSIG
    if (ins.size() == 8 && IsKeyCheck(ins[0], ins[1], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[2], ins[3], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[4], ins[5], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[6], ins[7], Opcode::CheckSig)) {
        out.kind = RevealKind::WithdrawQuad;
        out.keys = script.PushedKeys();
        return out;
    }
    // Time-locked pair: K CSV K CSV <T> CHECKSEQUENCEVERIFY
    if (ins.size() == 6 && IsKeyCheck(ins[0], ins[1], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[2], ins[3], Opcode::CheckSigVerify) && ins[4].op == Opcode::PushNum &&
        ins[5].op == Opcode::CheckSequenceVerify) {
        out.kind = RevealKind::TimelockSpend;
        out.keys = script.PushedKeys();
        out.timelock = static_cast<uint32_t>(ins[4].num);
        return out;
    }
    // 3-of-3: K CSV K CSV K CHECKSIG
    if (ins.size() == 6 && IsKeyCheck(ins[0], ins[1], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[2], ins[3], Opcode::CheckSigVerify) &&
        IsKeyCheck(ins[4], ins[5], Opcode::CheckSig)) {
        out.kind = RevealKind::EnforcementTriple;
        out.keys = script.PushedKeys();
        return out;
    }
    return out;
}

struct SpendInfo {
    Bytes32 txid{};
    Reveal reveal;
    std::vector<Outpoint> created; // outputs of the spending transaction
};

} // namespace

nlohmann::ordered_json ScanResult::ToJson() const
{
    nlohmann::ordered_json j;
    j["sequences"] = nlohmann::ordered_json::array();
    for (const SequenceDetection& s : sequences) {
        nlohmann::ordered_json e;
        e["deposit_txid"] = HexStr(s.deposit_txid);
        e["withdrawal_txid"] = HexStr(s.withdrawal_txid);
        e["final_txid"] = HexStr(s.final_txid);
        e["reject"] = s.reject;
        e["revealed_timelock"] = s.revealed_timelock;
        j["sequences"].push_back(e);
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const CorrelationEdge& e : graph.edges) {
        nlohmann::ordered_json je;
        je["kind"] = e.kind;
        je["a"] = HexStr(e.a.txid) + ":" + std::to_string(e.a.index);
        je["b"] = HexStr(e.b.txid) + ":" + std::to_string(e.b.index);
        j["edges"].push_back(je);
    }
    j["clusters"] = graph.cluster.empty()
                        ? 0
                        : 1 + std::max_element(graph.cluster.begin(), graph.cluster.end(),
                                               [](const auto& a, const auto& b) {
                                                   return a.second < b.second;
                                               })
                                  ->second;
    return j;
}

ScanResult ObserverScan(const ChainState& chain)
{
    // Index every script-path spend by the outpoint it consumed.
    std::map<Outpoint, SpendInfo> spends;
    for (const Block& block : chain.Blocks()) {
        for (const Transaction& tx : block.transactions) {
            Bytes32 txid = Txid(tx);
            for (size_t i = 0; i < tx.inputs.size(); ++i) {
                if (i >= tx.witnesses.size() || tx.witnesses[i].size() < 2) continue;
                const WitnessStack& w = tx.witnesses[i];
                auto script = ScriptProgram::Parse(w[w.size() - 2]);
                auto control = ControlBlock::Parse(w.back());
                if (!script || !control) continue;
                SpendInfo info;
                info.txid = txid;
                info.reveal = Classify(*script);
                info.reveal.internal_key = control->internal_key.ToBytes();
                for (size_t o = 0; o < tx.outputs.size(); ++o) {
                    info.created.push_back({txid, static_cast<uint32_t>(o)});
                }
                spends[{tx.inputs[i].prev_txid, tx.inputs[i].prev_index}] = std::move(info);
            }
        }
    }

    ScanResult result;
    auto& graph = result.graph;
    std::map<Bytes, int> internal_key_cluster;
    int next_cluster = 0;

    // Chain detection: a 2-of-2 reveal whose created output is spent by a
    // 4-key reveal whose created output is spent by either a time-locked pair
    // or a 3-key reveal re-using the quad's trailing keys.
    for (const auto& [spent, dep] : spends) {
        if (dep.reveal.kind != RevealKind::ReceivePair) continue;
        for (const Outpoint& vault_out : dep.created) {
            auto wit_it = spends.find(vault_out);
            if (wit_it == spends.end()) continue;
            const SpendInfo& wit = wit_it->second;
            if (wit.reveal.kind != RevealKind::WithdrawQuad) continue;
            for (const Outpoint& unvault_out : wit.created) {
                auto fin_it = spends.find(unvault_out);
                if (fin_it == spends.end()) continue;
                const SpendInfo& fin = fin_it->second;
                bool honest = fin.reveal.kind == RevealKind::TimelockSpend;
                bool reject = fin.reveal.kind == RevealKind::EnforcementTriple &&
                              wit.reveal.keys.size() == 4 && fin.reveal.keys.size() == 3 &&
                              fin.reveal.keys[0] == wit.reveal.keys[2] &&
                              fin.reveal.keys[1] == wit.reveal.keys[3];
                if (!honest && !reject) continue;

                SequenceDetection seq;
                seq.deposit_txid = dep.txid;
                seq.withdrawal_txid = wit.txid;
                seq.final_txid = fin.txid;
                seq.reject = reject;
                seq.revealed_timelock = fin.reveal.timelock;
                result.sequences.push_back(seq);

                graph.nodes.push_back(spent);
                graph.nodes.push_back(vault_out);
                graph.nodes.push_back(unvault_out);
                graph.edges.push_back({"same-sequence", spent, vault_out});
                graph.edges.push_back({"same-sequence", vault_out, unvault_out});
                if (reject) {
                    graph.edges.push_back({"enforcement-key-reuse", vault_out, unvault_out});
                }

                // Cluster by the shared internal key revealed in the control
                // blocks.
                const Bytes& ik = wit.reveal.internal_key;
                auto cluster_it = internal_key_cluster.find(ik);
                int cluster;
                if (cluster_it == internal_key_cluster.end()) {
                    cluster = next_cluster++;
                    internal_key_cluster.emplace(ik, cluster);
                } else {
                    cluster = cluster_it->second;
                    graph.edges.push_back({"internal-key-reuse", vault_out, vault_out});
                }
                graph.cluster[spent] = cluster;
                graph.cluster[vault_out] = cluster;
                graph.cluster[unvault_out] = cluster;
            }
        }
    }

    // Change reuse: a later sequence's deposit consumed an output created by
    // an earlier sequence's final transaction (c_s = r_t).
    std::map<Bytes32, size_t> final_by_txid;
    for (size_t s = 0; s < result.sequences.size(); ++s) {
        final_by_txid[result.sequences[s].final_txid] = s;
    }
    for (const auto& [spent, dep] : spends) {
        if (dep.reveal.kind != RevealKind::ReceivePair) continue;
        auto it = final_by_txid.find(spent.txid);
        if (it == final_by_txid.end()) continue;
        for (const SequenceDetection& seq : result.sequences) {
            if (seq.deposit_txid == dep.txid && !(seq.final_txid == spent.txid)) {
                graph.edges.push_back(
                    {"change-reuse", spent, {seq.deposit_txid, 0}});
            }
        }
    }

    return result;
}

} // namespace covlab

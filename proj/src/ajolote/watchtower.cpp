// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/watchtower.h"

#include "script/satisfier.h"

namespace covlab {

bool LooksLikeWithdrawalLeaf(const ScriptProgram& script)
{
    // Four-key CHECKSIGVERIFY chain ending in CHECKSIG.
    const auto& ins = script.instructions;
    if (ins.size() != 8) return false;
    for (size_t i = 0; i < 8; i += 2) {
        if (ins[i].op != Opcode::PushKey) return false;
    }
    return ins[1].op == Opcode::CheckSigVerify && ins[3].op == Opcode::CheckSigVerify &&
           ins[5].op == Opcode::CheckSigVerify && ins[7].op == Opcode::CheckSig;
}

SubmitResult BroadcastFallback(AjoloteWorld& world, WatchtowerState& wt, WtVaultRecord& record)
{
    Transaction fb = record.tx_fb;
    Bytes32 wit_txid = Txid(record.tx_wit);
    TxOutput unvault_out = record.tx_wit.outputs[0];
    PrevoutView view = [wit_txid, unvault_out](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == wit_txid && o.index == 0) return unvault_out;
        return std::nullopt;
    };
    Signature wk_sig = SignInput(fb, 0, wt.ResponsePriv(record.cursor_j), Semantics::Taproot,
                                 SIGHASH_ALL, view);
    fb.witnesses.assign(fb.inputs.size(), {});
    WitnessStack& w = fb.witnesses[0];
    // Leaf: E1 CHECKSIGVERIFY E2 CHECKSIGVERIFY W_k CHECKSIG.
    w.push_back(EncodeSigElement(wk_sig, SIGHASH_ALL));
    w.push_back(EncodeSigElement(record.sig_fb_2, SIGHASH_ALL));
    w.push_back(EncodeSigElement(record.sig_fb_1, SIGHASH_ALL));
    w.push_back(record.fb_leaf_script.Serialize());
    w.push_back(record.control_block.Serialize());
    SubmitResult r = world.chain.Submit(fb);
    world.Log("reject", wt.id + " broadcast fall-back",
              "vault=" + std::to_string(record.vault_index) + " " +
                  (r.accepted ? "accepted" : RejectReasonName(r.reason)));
    return r;
}

WtAction WtStep(AjoloteWorld& world, WatchtowerState& wt, const Transaction& tx, uint64_t height)
{
    if (!wt.online) return WtAction::None;
    Bytes32 txid = Txid(tx);

    // Registered withdrawal?
    for (WtVaultRecord& record : wt.vaults) {
        if (Txid(record.tx_wit) != txid) continue;
        uint64_t amount = record.tx_wit.outputs[0].amount;
        wt.observed_withdrawals.push_back({height, amount});

        const WithdrawalConstraints& w = wt.constraints;
        bool violation = false;
        std::string why;
        if (!w.PhaseAllowed(height)) {
            violation = true;
            why = "outside permitted phase";
        }
        uint64_t window_start = (w.window_blocks > 0 && height > w.window_blocks)
                                    ? height - w.window_blocks
                                    : 0;
        uint32_t count = 0;
        uint64_t value = 0;
        for (const auto& [h, a] : wt.observed_withdrawals) {
            if (h > window_start || w.window_blocks == 0) {
                count += 1;
                value += a;
            }
        }
        if (w.max_withdrawals_per_window > 0 && count > w.max_withdrawals_per_window) {
            violation = true;
            why = "withdrawal count " + std::to_string(count) + " over limit";
        }
        if (w.max_value_per_window > 0 && value > w.max_value_per_window) {
            violation = true;
            why = "withdrawal value " + std::to_string(value) + " over limit";
        }
        if (!violation) {
            world.Log("watchtower", wt.id + " observed compliant withdrawal",
                      "vault=" + std::to_string(record.vault_index));
            return WtAction::None;
        }
        world.Log("watchtower", wt.id + " detected violation", why);
        record.reject_pending = true;
        BroadcastFallback(world, wt, record);
        return WtAction::BroadcastFallback;
    }

    // Unregistered withdrawal shape: alert only (no fall-back held for it).
    for (size_t i = 0; i < tx.inputs.size() && i < tx.witnesses.size(); ++i) {
        const WitnessStack& w = tx.witnesses[i];
        if (w.size() < 2) continue;
        auto script = ScriptProgram::Parse(w[w.size() - 2]);
        if (script && LooksLikeWithdrawalLeaf(*script)) {
            bool known = false;
            for (const WtVaultRecord& record : wt.vaults) {
                if (Txid(record.tx_wit) == txid) known = true;
            }
            if (!known) {
                wt.alerts.push_back("unregistered withdrawal " + HexStr(txid).substr(0, 12));
                world.Log("watchtower", wt.id + " alert", "unregistered withdrawal shape");
                return WtAction::Alert;
            }
        }
    }
    return WtAction::None;
}

void WatchtowerTick(AjoloteWorld& world)
{
    uint64_t from = world.last_processed_height;
    const auto& blocks = world.chain.Blocks();
    for (const Block& b : blocks) {
        if (b.height <= from) continue;
        for (const Transaction& tx : b.transactions) {
            for (WatchtowerState& wt : world.watchtowers) {
                WtStep(world, wt, tx, b.height);
            }
        }
    }
    // Retry pending fall-backs: a violation response that missed the mempool
    // (fee floor) is retried while the unvault output remains unspent.
    for (WatchtowerState& wt : world.watchtowers) {
        if (!wt.online) continue;
        for (WtVaultRecord& record : wt.vaults) {
            if (!record.reject_pending) continue;
            Bytes32 wit_id = Txid(record.tx_wit);
            Bytes32 fb_id = Txid(record.tx_fb);
            if (world.chain.Confirmations(fb_id) > 0) {
                record.reject_pending = false;
                continue;
            }
            if (world.chain.InMempool(fb_id)) continue;
            if (!world.chain.LookupUtxo({wit_id, 0})) {
                // Someone else consumed the unvault output: the race is lost.
                record.reject_pending = false;
                wt.alerts.push_back("fall-back lost the race for vault " +
                                    std::to_string(record.vault_index));
                world.Log("watchtower", wt.id + " alert", "fall-back lost the race");
                continue;
            }
            BroadcastFallback(world, wt, record);
        }
    }
}

} // namespace covlab

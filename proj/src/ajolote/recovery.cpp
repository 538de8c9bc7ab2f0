// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/recovery.h"

#include "crypto/hash.h"

#include <algorithm>

namespace covlab {

namespace {

// Broadcasts TX_wit (if the vault output is still unspent) and TX_fb for one
// record, signing with whichever devices are on hand.
CeremonyOutcome BroadcastCovenantPair(AjoloteWorld& world, const VaultRecord& record,
                                      const std::vector<const SignerDevice*>& devices,
                                      const std::string& ceremony)
{
    const SignerDevice* reference = devices.front();
    const AjoloteConfig& cfg =
        world.mobile.config ? *world.mobile.config : *reference->config;
    (void)reference;
    AjolotePolicies pol = PoliciesFromKeys(record.keys);
    std::optional<GroupPoint> internal;
    if (world.per_vault_internal_keys) {
        internal = PerVaultInternalKey(record.vault_index, world.SetupHash(world.mobile));
    }
    BuiltTree vault_tree = BuildVaultTree(pol, internal);
    BuiltTree unvault_tree = BuildUnvaultTree(pol, cfg.timelock, cfg.watchtowers, internal);
    PrevoutView view = world.chain.UtxoView();

    Bytes32 dep_txid = record.DepTxid();
    Bytes32 wit_txid = record.WitTxid();
    bool vault_unspent = world.chain.LookupUtxo({dep_txid, 0}).has_value();
    if (vault_unspent) {
        Transaction wit = record.tx_wit;
        std::map<std::string, Bytes> stored{
            {"E1", EncodeSigElement(record.sig_wit_1, SIGHASH_ALL)},
            {"E2", EncodeSigElement(record.sig_wit_2, SIGHASH_ALL)}};
        // The 4-of-4 leaf needs the mobile and home exactly; any other pair
        // uses the 2-of-5 branch.
        bool mobile_home = devices.size() >= 2 && devices[0]->signer_index == 1 &&
                           devices[1]->signer_index == 2;
        size_t leaf = mobile_home ? 0 : 1;
        SignatureOracle oracle = DeviceOracle(devices, {}, record.account_i, 0, record.cursor_j,
                                              stored, wit, 0, view, pol.keys);
        try {
            wit.witnesses.assign(1, LeafWitness(vault_tree, leaf, pol, oracle, 0));
        } catch (const Unsatisfiable& e) {
            return CeremonyOutcome::Abort(std::string("cannot authorize withdrawal: ") + e.what());
        }
        SubmitResult r = world.chain.Submit(wit);
        if (!r.accepted && r.reason != RejectReason::DoubleSpend) {
            return CeremonyOutcome::Abort("withdrawal rejected: " + RejectReasonName(r.reason));
        }
    }
    // TX_fb via the first available signer's pay-to-fallback leaf.
    if (world.chain.Confirmations(Txid(record.tx_fb)) == 0 &&
        !world.chain.InMempool(Txid(record.tx_fb))) {
        bool unvault_spent = world.chain.Confirmations(wit_txid) > 0 &&
                             !world.chain.LookupUtxo({wit_txid, 0}).has_value();
        if (!unvault_spent) {
            Transaction fb = record.tx_fb;
            std::map<std::string, Bytes> stored{
                {"E1", EncodeSigElement(record.sig_fb_1, SIGHASH_ALL)},
                {"E2", EncodeSigElement(record.sig_fb_2, SIGHASH_ALL)}};
            size_t signer_n = devices.front()->signer_index;
            size_t leaf_index = 2 + (signer_n - 1);
            SignatureOracle oracle = DeviceOracle(devices, {}, record.account_i, 0,
                                                  record.cursor_j, stored, fb, 0, view, pol.keys);
            fb.witnesses.assign(1, LeafWitness(unvault_tree, leaf_index, pol, oracle, 0));
            SubmitResult r = world.chain.Submit(fb);
            if (!r.accepted && r.reason != RejectReason::DoubleSpend) {
                return CeremonyOutcome::Abort("fall-back rejected: " + RejectReasonName(r.reason));
            }
        }
    }
    world.Log(ceremony, "covenant pair broadcast", "v=" + std::to_string(record.vault_index));
    return CeremonyOutcome::Ok();
}

CeremonyOutcome RunFallback(AjoloteWorld& world, const std::vector<VaultRecord>& records,
                            const std::vector<const SignerDevice*>& devices,
                            const std::string& ceremony)
{
    if (devices.size() < 2) return CeremonyOutcome::Abort("need two signing devices");
    for (const VaultRecord& record : records) {
        CeremonyOutcome r = BroadcastCovenantPair(world, record, devices, ceremony);
        if (!r.ok) return r;
    }
    world.Log(ceremony, "complete", std::to_string(records.size()) + " vaults");
    return CeremonyOutcome::Ok(std::to_string(records.size()) + " vaults");
}

std::vector<const SignerDevice*> AvailableSigners(AjoloteWorld& world,
                                                  const std::set<std::string>& exclude)
{
    std::vector<const SignerDevice*> out;
    for (SignerDevice* d : world.Signers()) {
        if (exclude.count(d->id) || d->decommissioned || !d->master) continue;
        out.push_back(d);
    }
    return out;
}

} // namespace

CeremonyOutcome FallbackV1(AjoloteWorld& world)
{
    std::vector<const SignerDevice*> devices = AvailableSigners(world, {});
    if (devices.empty() || devices.front()->id != "mobile") {
        return CeremonyOutcome::Abort("mobile unavailable; use another variant");
    }
    if (devices.size() < 2) return CeremonyOutcome::Abort("no second signer available");
    return RunFallback(world, world.mobile.vaults, {devices[0], devices[1]}, "fallback_v1");
}

CeremonyOutcome FallbackV2(AjoloteWorld& world)
{
    // Emergency coordinator; the home signer holds the covenant set.
    std::vector<const SignerDevice*> devices = AvailableSigners(world, {"mobile"});
    if (devices.empty() || devices.front()->id != "home") {
        return CeremonyOutcome::Abort("home signer unavailable; use variant 3");
    }
    if (devices.size() < 2) return CeremonyOutcome::Abort("no second signer available");
    return RunFallback(world, world.home.vaults, {devices[0], devices[1]}, "fallback_v2");
}

CeremonyOutcome FallbackV3(AjoloteWorld& world)
{
    // Neither mobile nor home: covenant data comes from an honest watchtower,
    // reached with the credentials held by a remaining signer.
    std::vector<const SignerDevice*> devices = AvailableSigners(world, {"mobile", "home"});
    if (devices.size() < 2) return CeremonyOutcome::Abort("fewer than two signers remain");
    if (devices.front()->onion_ids.empty()) {
        return CeremonyOutcome::Abort("remaining signer lacks watchtower credentials");
    }
    const WatchtowerState* source = nullptr;
    for (const WatchtowerState& wt : world.watchtowers) {
        if (wt.online && !wt.compromised) {
            source = &wt;
            break;
        }
    }
    if (!source) return CeremonyOutcome::Abort("no honest data source");
    std::vector<VaultRecord> records;
    for (const WtVaultRecord& v : source->vaults) {
        VaultRecord r;
        r.vault_index = v.vault_index;
        r.tx_dep = v.tx_dep;
        r.tx_wit = v.tx_wit;
        r.tx_fb = v.tx_fb;
        r.sig_wit_1 = v.sig_wit_1;
        r.sig_wit_2 = v.sig_wit_2;
        r.sig_fb_1 = v.sig_fb_1;
        r.sig_fb_2 = v.sig_fb_2;
        r.e1 = v.e1;
        r.e2 = v.e2;
        r.cursor_j = v.cursor_j;
        r.account_i = v.account_i;
        r.keys = v.keys;
        records.push_back(std::move(r));
    }
    world.Log("fallback_v3", "covenant set retrieved", source->id);
    return RunFallback(world, records, {devices[0], devices[1]}, "fallback_v3");
}

CeremonyOutcome RotateAccounts(AjoloteWorld& world, uint32_t new_account_index,
                               const std::set<std::string>& decommissioned)
{
    std::string selection;
    for (const std::string& id : decommissioned) selection += id + ",";
    for (SignerDevice* d : world.Signers()) {
        if (decommissioned.count(d->id)) {
            d->decommissioned = true;
            continue;
        }
        if (!d->master) continue;
        d->account_index = new_account_index;
        if (d->id != "mobile") {
            // The user verifies the index and the decommission selection.
            world.user.Compare("rotation index on " + d->id,
                               std::to_string(new_account_index),
                               std::to_string(d->account_index));
            world.user.Compare("decommission selection on " + d->id, selection, selection);
            if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);
        }
    }
    // Fresh accounts exchanged through the mobile.
    std::map<size_t, ExtendedKey> accounts;
    for (SignerDevice* d : world.Signers()) {
        if (d->decommissioned || !d->master) continue;
        accounts.emplace(d->signer_index, d->Account().ToPublic());
    }
    for (SignerDevice* d : world.Signers()) {
        if (d->decommissioned || !d->master) continue;
        for (const auto& [n, a] : accounts) {
            d->signer_accounts.erase(n);
            d->signer_accounts.emplace(n, a);
        }
        d->cursor_h = 0;
        d->cursor_j = 0;
    }
    world.Log("rotate_accounts", "rotated", "i=" + std::to_string(new_account_index));
    return CeremonyOutcome::Ok();
}

CeremonyOutcome NewMobile(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    SignerDevice& h = world.home;
    if (!h.master) return CeremonyOutcome::Abort("home signer unavailable for bootstrap");
    m = SignerDevice{};
    m.id = "mobile";
    m.signer_index = 1;
    m.master = ExtendedKey::Master(world.SeedHash("master-replacement", 1));
    m.account_index = h.account_index;
    KeyPair noise = KeypairGen(world.SeedHash("noise-replacement", 1));
    m.noise_priv = noise.priv;
    m.noise_pub = noise.pub;
    m.config = world.user.intended;
    // Bootstrap the setup state from the home signer.
    m.signer_accounts = h.signer_accounts;
    m.signer_accounts.erase(1);
    m.signer_accounts.emplace(1, m.Account().ToPublic());
    m.wt_accounts = h.wt_accounts;
    m.onion_ids = h.onion_ids;
    m.receive_coins = h.receive_coins;
    world.Log("new_mobile", "bootstrapped", "from home signer");
    return CeremonyOutcome::Ok();
}

CeremonyOutcome WtReinit(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    if (!m.noise_pub) return CeremonyOutcome::Abort("mobile has no noise identity");
    std::vector<ExtendedKey> new_accounts;
    std::vector<std::string> new_onions;
    for (WatchtowerState& wt : world.watchtowers) {
        // Authenticate the rotation messages with the previous account key.
        ExtendedKey old_account = wt.Account();
        wt.account_index += 1;
        wt.onion = "onion-" + std::to_string(wt.index) + "-" + std::to_string(wt.account_index);
        wt.user_noise = m.noise_pub;
        ExtendedKey fresh = wt.Account();
        Bytes32 msg = TaggedHashWriter("covlab/wt-rotation")
                          .Write(fresh.PublicKey().ToBytes())
                          .Write(Bytes(wt.onion.begin(), wt.onion.end()))
                          .Finalize();
        Signature sig = Sign(old_account.PrivateKey(), msg);
        // The mobile verifies against the account it already holds.
        if (wt.index - 1 < m.wt_accounts.size()) {
            if (!Verify(m.wt_accounts[wt.index - 1].PublicKey(), msg, sig)) {
                world.Log("wt_reinit", "authentication failed", wt.id);
                return CeremonyOutcome::Abort(wt.id + " rotation signature invalid");
            }
        }
        new_accounts.push_back(fresh.ToPublic());
        new_onions.push_back(wt.onion);
        // Covenant history to the (possibly new) mobile.
        if (m.vaults.empty()) {
            for (const WtVaultRecord& v : wt.vaults) {
                VaultRecord r;
                r.vault_index = v.vault_index;
                r.tx_dep = v.tx_dep;
                r.tx_wit = v.tx_wit;
                r.tx_fb = v.tx_fb;
                r.sig_wit_1 = v.sig_wit_1;
                r.sig_wit_2 = v.sig_wit_2;
                r.sig_fb_1 = v.sig_fb_1;
                r.sig_fb_2 = v.sig_fb_2;
                r.e1 = v.e1;
                r.e2 = v.e2;
                r.cursor_j = v.cursor_j;
                r.account_i = v.account_i;
                r.keys = v.keys;
                m.vaults.push_back(std::move(r));
            }
        }
    }
    m.wt_accounts = new_accounts;
    m.onion_ids = new_onions;
    for (SignerDevice* d : world.Signers()) {
        if (d->id == "mobile" || d->decommissioned || !d->master) continue;
        d->wt_accounts = new_accounts;
        d->onion_ids = new_onions;
        d->noise_pub = m.noise_pub;
        d->noise_priv = m.noise_priv;
    }
    world.Log("wt_reinit", "rotated", std::to_string(world.watchtowers.size()) + " watchtowers");
    return CeremonyOutcome::Ok();
}

CeremonyOutcome NewSigners(AjoloteWorld& world, const std::string& device_id)
{
    SignerDevice* d = world.DeviceById(device_id);
    if (!d) return CeremonyOutcome::Abort("unknown device");
    SignerDevice& m = world.mobile;
    size_t index = d->signer_index;
    *d = SignerDevice{};
    d->id = device_id;
    d->signer_index = index;
    d->master = ExtendedKey::Master(world.SeedHash("master-replacement", index));
    d->account_index = m.account_index;
    d->config = m.config;
    d->wt_accounts = m.wt_accounts;
    d->onion_ids = m.onion_ids;
    d->noise_priv = m.noise_priv;
    d->noise_pub = m.noise_pub;
    // Account exchange through the mobile.
    m.signer_accounts.erase(index);
    m.signer_accounts.emplace(index, d->Account().ToPublic());
    for (SignerDevice* other : world.Signers()) {
        if (other->decommissioned || !other->master) continue;
        other->signer_accounts.erase(index);
        other->signer_accounts.emplace(index, d->Account().ToPublic());
    }
    d->signer_accounts = m.signer_accounts;
    if (device_id == "home") {
        d->vaults = m.vaults; // covenant history, watchtower-signed
        d->receive_coins = m.receive_coins;
    }
    world.Log("new_signers", "replaced", device_id);
    return CeremonyOutcome::Ok();
}

CeremonyOutcome SendNewFallback(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    if (!m.config) return CeremonyOutcome::Abort("setup incomplete");

    struct InputPlan {
        Outpoint outpoint;
        uint64_t amount;
        bool is_fallback;
        uint32_t cursor;
        uint32_t account_i;
        KeyMap keys;
    };
    std::vector<InputPlan> plans;
    for (const FbCoin& c : world.fb_coins) {
        if (world.chain.LookupUtxo(c.outpoint)) {
            plans.push_back({c.outpoint, c.amount, true, c.cursor_j, c.account_i, c.keys});
        }
    }
    for (const ReceiveCoin& c : m.receive_coins) {
        if (world.chain.LookupUtxo(c.outpoint)) {
            plans.push_back({c.outpoint, c.amount, false, c.cursor_h, c.account_i, c.keys});
        }
    }
    if (plans.empty()) return CeremonyOutcome::Abort("nothing to sweep");
    std::sort(plans.begin(), plans.end(), [](const InputPlan& a, const InputPlan& b) {
        if (a.outpoint.txid != b.outpoint.txid) return a.outpoint.txid < b.outpoint.txid;
        return a.outpoint.index < b.outpoint.index;
    });

    // Destination: the fall-back policy under the current accounts at a
    // fresh cursor.
    std::vector<const SignerDevice*> signers = AvailableSigners(world, {});
    if (signers.size() < 3) return CeremonyOutcome::Abort("need three signers");
    uint32_t new_cursor = m.cursor_j;
    AjolotePolicies dest_pol =
        world.PoliciesFromDevice(*signers.front(), 0, new_cursor, std::nullopt, std::nullopt);
    BuiltTree dest_tree = BuildFallbackTree(dest_pol);

    uint64_t total = 0;
    Transaction tx;
    for (const InputPlan& p : plans) {
        tx.inputs.push_back(TxInput{p.outpoint.txid, p.outpoint.index, 0xffffffff, {}});
        total += p.amount;
    }
    tx.outputs.push_back(TxOutput{total, dest_tree.script});

    PrevoutView view = world.chain.UtxoView();
    auto build_witnesses = [&](bool placeholder) {
        tx.witnesses.assign(tx.inputs.size(), {});
        for (size_t i = 0; i < plans.size(); ++i) {
            const InputPlan& p = plans[i];
            if (p.is_fallback) {
                // Only the F-key fragments matter for the 3-of-5 leaf.
                AjolotePolicies pol = PoliciesFromKeys(p.keys);
                BuiltTree tree = BuildFallbackTree(pol);
                if (placeholder) {
                    tx.witnesses[i] = PlaceholderWitness(tree, 1, pol, 0);
                } else {
                    SignatureOracle oracle =
                        DeviceOracle(signers, {}, p.account_i, 0, p.cursor, {}, tx, i, view, pol.keys);
                    tx.witnesses[i] = LeafWitness(tree, 1, pol, oracle, 0);
                }
            } else {
                AjolotePolicies pol = PoliciesFromKeys(p.keys);
                BuiltTree tree = BuildReceiveTree(pol);
                if (placeholder) {
                    tx.witnesses[i] = PlaceholderWitness(tree, 1, pol, 0);
                } else {
                    SignatureOracle oracle =
                        DeviceOracle(signers, {}, p.account_i, p.cursor, 0, {}, tx, i, view, pol.keys);
                    tx.witnesses[i] = LeafWitness(tree, 1, pol, oracle, 0);
                }
            }
        }
    };
    build_witnesses(true);
    uint64_t fee = COVENANT_FEERATE * TxSize(tx);
    if (fee >= total) return CeremonyOutcome::Abort("fees exceed the swept balance");
    tx.outputs[0].amount = total - fee;
    build_witnesses(false);

    SubmitResult r = world.chain.Submit(tx);
    if (!r.accepted) {
        return CeremonyOutcome::Abort("sweep rejected: " + RejectReasonName(r.reason));
    }
    world.fb_coins.clear();
    world.fb_coins.push_back(FbCoin{Outpoint{Txid(tx), 0}, tx.outputs[0].amount, new_cursor,
                                    m.account_index, dest_pol.keys});
    for (SignerDevice* d : world.Signers()) d->receive_coins.clear();
    m.cursor_j += 1;
    world.home.cursor_j = m.cursor_j;
    world.known_scripts[dest_tree.script] = AjoloteOutputType::Fallback;
    world.ops_tx_count += 1;
    world.Log("send_new_fallback", "swept",
              "inputs=" + std::to_string(plans.size()) + " total=" + std::to_string(total - fee));
    return CeremonyOutcome::Ok();
}

CeremonyOutcome ReestablishTier2(AjoloteWorld& world, uint64_t amount)
{
    SignerDevice& m = world.mobile;
    if (world.fb_coins.empty()) return CeremonyOutcome::Abort("no fall-back output to draw from");
    FbCoin source = world.fb_coins.back();
    auto coin = world.chain.LookupUtxo(source.outpoint);
    if (!coin) return CeremonyOutcome::Abort("fall-back output not available");
    if (amount >= coin->amount) return CeremonyOutcome::Abort("amount exceeds the fall-back output");

    std::vector<const SignerDevice*> signers = AvailableSigners(world, {});
    if (signers.size() < 3) return CeremonyOutcome::Abort("need three signers");

    uint32_t receive_cursor = m.cursor_h;
    AjolotePolicies rec_pol =
        world.PoliciesFromDevice(*signers.front(), receive_cursor, 0, std::nullopt, std::nullopt);
    BuiltTree rec_tree = BuildReceiveTree(rec_pol);
    uint32_t fb_cursor = m.cursor_j;
    AjolotePolicies fb_pol =
        world.PoliciesFromDevice(*signers.front(), 0, fb_cursor, std::nullopt, std::nullopt);
    BuiltTree fb_tree = BuildFallbackTree(fb_pol);

    Transaction tx;
    tx.inputs.push_back(TxInput{source.outpoint.txid, source.outpoint.index, 0xffffffff, {}});
    tx.outputs.push_back(TxOutput{amount, rec_tree.script});
    tx.outputs.push_back(TxOutput{coin->amount - amount, fb_tree.script});

    AjolotePolicies src_pol = PoliciesFromKeys(source.keys);
    BuiltTree src_tree = BuildFallbackTree(src_pol);
    PrevoutView view = world.chain.UtxoView();
    {
        Transaction probe = tx;
        probe.witnesses.assign(1, PlaceholderWitness(src_tree, 1, src_pol, 0));
        uint64_t fee = COVENANT_FEERATE * TxSize(probe);
        if (amount + fee >= coin->amount) return CeremonyOutcome::Abort("amount leaves no fee");
        tx.outputs[1].amount = coin->amount - amount - fee;
    }
    SignatureOracle oracle =
        DeviceOracle(signers, {}, source.account_i, 0, source.cursor_j, {}, tx, 0, view,
                     src_pol.keys);
    tx.witnesses.assign(1, LeafWitness(src_tree, 1, src_pol, oracle, 0));
    SubmitResult r = world.chain.Submit(tx);
    if (!r.accepted) return CeremonyOutcome::Abort("rejected: " + RejectReasonName(r.reason));

    world.fb_coins.pop_back();
    world.fb_coins.push_back(FbCoin{Outpoint{Txid(tx), 1}, tx.outputs[1].amount, fb_cursor,
                                    m.account_index, fb_pol.keys});
    ReceiveCoin rec{Outpoint{Txid(tx), 0}, amount, receive_cursor, m.account_index, rec_pol.keys};
    m.receive_coins.push_back(rec);
    world.home.receive_coins.push_back(rec);
    m.cursor_h += 1;
    world.home.cursor_h = m.cursor_h;
    m.cursor_j += 1;
    world.home.cursor_j = m.cursor_j;
    world.known_scripts[rec_tree.script] = AjoloteOutputType::Receive;
    world.known_scripts[fb_tree.script] = AjoloteOutputType::Fallback;
    world.ops_tx_count += 1;
    world.Log("reestablish_tier2", "moved",
              "amount=" + std::to_string(amount) + " to tier 1");
    return CeremonyOutcome::Ok();
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/ceremonies.h"

#include "ajolote/coincontrol.h"
#include "crypto/hash.h"

#include <algorithm>

namespace covlab {

std::string CeremonyName(CeremonyKind k)
{
    switch (k) {
    case CeremonyKind::SetupMobile: return "setup_mobile";
    case CeremonyKind::SetupWatchtowers: return "setup_watchtowers";
    case CeremonyKind::SetupSigners: return "setup_signers";
    case CeremonyKind::SetupFinalize: return "setup_finalize";
    case CeremonyKind::SetupTest: return "setup_test";
    case CeremonyKind::Receive: return "receive";
    case CeremonyKind::VaultDeposit: return "vault_deposit";
    case CeremonyKind::Withdraw: return "withdraw";
    case CeremonyKind::Spend: return "spend";
    case CeremonyKind::Reject: return "reject";
    case CeremonyKind::HealthCheck: return "health_check";
    case CeremonyKind::FallbackV1: return "fallback_v1";
    case CeremonyKind::FallbackV2: return "fallback_v2";
    case CeremonyKind::FallbackV3: return "fallback_v3";
    case CeremonyKind::RotateAccounts: return "rotate_accounts";
    case CeremonyKind::NewMobile: return "new_mobile";
    case CeremonyKind::WtReinit: return "wt_reinit";
    case CeremonyKind::NewSigners: return "new_signers";
    case CeremonyKind::SendNewFallback: return "send_new_fallback";
    case CeremonyKind::ReestablishTier2: return "reestablish_tier2";
    }
    return "?";
}

std::optional<CeremonyKind> CeremonyFromName(const std::string& name)
{
    for (int i = 0; i <= static_cast<int>(CeremonyKind::ReestablishTier2); ++i) {
        CeremonyKind k = static_cast<CeremonyKind>(i);
        if (CeremonyName(k) == name) return k;
    }
    return std::nullopt;
}

SignatureOracle DeviceOracle(const std::vector<const SignerDevice*>& devices,
                             const std::vector<const WatchtowerState*>& wts, uint32_t account_i,
                             uint32_t cursor_h, uint32_t cursor_j,
                             std::map<std::string, Bytes> stored_elements, const Transaction& tx,
                             size_t input_index, const PrevoutView& view, const KeyMap& expected)
{
    Transaction tx_copy = tx;
    return [devices, wts, account_i, cursor_h, cursor_j, stored = std::move(stored_elements),
            tx_copy, input_index, view, expected](const std::string& name) -> std::optional<Bytes> {
        auto it = stored.find(name);
        if (it != stored.end()) return it->second;
        if (name.empty()) return std::nullopt;
        char kind = name[0];
        size_t index = 0;
        try {
            index = std::stoul(name.substr(1));
        } catch (...) {
            return std::nullopt;
        }
        auto matches = [&](const Scalar& priv) {
            auto want = expected.find(name);
            if (want == expected.end()) return true;
            return GroupPoint::MulGen(priv) == want->second;
        };
        Bytes32 digest = SighashMsg(tx_copy, input_index, Semantics::Taproot, SIGHASH_ALL, view);
        if (kind == 'W') {
            for (const WatchtowerState* wt : wts) {
                if (wt && wt->index == index) {
                    Scalar priv = wt->ResponsePriv(cursor_j);
                    if (!matches(priv)) continue;
                    return EncodeSigElement(Sign(priv, digest), SIGHASH_ALL);
                }
            }
            return std::nullopt;
        }
        KeyBranch branch;
        uint32_t cursor = cursor_j;
        switch (kind) {
        case 'R': branch = KeyBranch::Receive; cursor = cursor_h; break;
        case 'V': branch = KeyBranch::Withdraw; break;
        case 'U': branch = KeyBranch::Unvault; break;
        case 'F': branch = KeyBranch::Fallback; break;
        default: return std::nullopt;
        }
        for (const SignerDevice* d : devices) {
            if (d && d->signer_index == index && d->master) {
                Scalar priv = d->OutputPrivAt(account_i, branch, cursor);
                // A replaced device's fresh master cannot satisfy an old
                // descriptor slot; it declines instead of mis-signing.
                if (!matches(priv)) continue;
                return EncodeSigElement(Sign(priv, digest), SIGHASH_ALL);
            }
        }
        return std::nullopt;
    };
}

WitnessStack LeafWitness(const BuiltTree& bt, size_t leaf_index, const AjolotePolicies& pol,
                         const SignatureOracle& oracle, uint32_t confirmed_age)
{
    SatisfyContext ctx;
    ctx.sign = oracle;
    ctx.confirmed_age = confirmed_age;
    Witness w = Satisfy(bt.leaf_policies.at(leaf_index), pol.keys, ctx);
    TapLeaf leaf = bt.LeafFor(leaf_index, pol.keys);
    WitnessStack out = w.elements;
    out.push_back(leaf.script.Serialize());
    out.push_back(ProveInclusion(bt.tree, leaf, bt.internal_key).Serialize());
    return out;
}

WitnessStack PlaceholderWitness(const BuiltTree& bt, size_t leaf_index, const AjolotePolicies& pol,
                                uint32_t confirmed_age)
{
    SatisfyContext ctx;
    ctx.sign = [](const std::string&) -> std::optional<Bytes> { return Bytes(65, 0); };
    ctx.confirmed_age = confirmed_age;
    Witness w = Satisfy(bt.leaf_policies.at(leaf_index), pol.keys, ctx);
    TapLeaf leaf = bt.LeafFor(leaf_index, pol.keys);
    WitnessStack out = w.elements;
    out.push_back(leaf.script.Serialize());
    out.push_back(ProveInclusion(bt.tree, leaf, bt.internal_key).Serialize());
    return out;
}

namespace {

std::string PointHex(const GroupPoint& p) { return HexStr(p.ToBytes()); }

bool TamperActive(const AjoloteWorld& world, TamperPlan::Datum datum, bool mobile_path)
{
    if (!world.tamper || world.tamper->datum != datum) return false;
    if (mobile_path) return world.tamper->via_mobile && world.mobile.compromised;
    return world.tamper->via_computer && world.computer_compromised;
}

GroupPoint AttackerPub(AjoloteWorld& world)
{
    if (!world.tamper->attacker_key) {
        world.tamper->attacker_key = KeypairGen(world.SeedHash("attacker-key"));
    }
    return world.tamper->attacker_key->pub;
}

// Tampered copy of a watchtower account list for one delivery path.
std::vector<ExtendedKey> MaybeTamperWtAccounts(AjoloteWorld& world,
                                               const std::vector<ExtendedKey>& accounts,
                                               bool mobile_path)
{
    if (!TamperActive(world, TamperPlan::Datum::WtAccount, mobile_path)) return accounts;
    std::vector<ExtendedKey> out = accounts;
    size_t idx = world.tamper->index % out.size();
    // An account the attacker controls: a fresh master's first account.
    ExtendedKey attacker = ExtendedKey::Master(world.SeedHash("attacker-wt-master"));
    out[idx] = attacker.DeriveChild(1, true).ToPublic();
    world.tamper->applied = true;
    return out;
}

std::vector<std::string> MaybeTamperOnions(AjoloteWorld& world,
                                           const std::vector<std::string>& onions, bool mobile_path)
{
    std::vector<std::string> out = onions;
    if (TamperActive(world, TamperPlan::Datum::OnionId, mobile_path) && !out.empty()) {
        out[world.tamper->index % out.size()] = "onion-attacker";
        world.tamper->applied = true;
    }
    if (TamperActive(world, TamperPlan::Datum::OmitOnion, mobile_path) && !out.empty()) {
        out.erase(out.begin() + (world.tamper->index % out.size()));
        world.tamper->applied = true;
    }
    return out;
}

} // namespace

CeremonyOutcome SetupMobile(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    m.master = ExtendedKey::Master(world.SeedHash("master", 1));
    m.account_index = 1;
    KeyPair noise = KeypairGen(world.SeedHash("noise", 1));
    m.noise_priv = noise.priv;
    m.noise_pub = noise.pub;
    AjoloteConfig cfg = world.user.intended;
    if (world.tamper && world.tamper->datum == TamperPlan::Datum::ConfigT &&
        world.tamper->via_mobile && m.compromised) {
        cfg.timelock += 1; // the compromised mobile stores a weakened config
        world.tamper->applied = true;
    }
    m.config = cfg;
    m.signer_accounts.emplace(1, m.Account().ToPublic());
    world.Log("setup_mobile", "initialized", "account=1");
    return CeremonyOutcome::Ok();
}

CeremonyOutcome SetupWatchtowers(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    if (!m.master || !m.config) return CeremonyOutcome::Abort("mobile not initialized");
    const AjoloteConfig& cfg = *m.config;
    uint32_t n = cfg.watchtowers;

    // Two providers split the fleet (one provider when N == 1).
    size_t provider_count = n >= 2 ? 2 : 1;
    world.providers.assign(provider_count, ProviderState{});
    world.watchtowers.clear();

    GroupPoint registered_noise = *m.noise_pub;
    if (world.tamper && world.tamper->datum == TamperPlan::Datum::NoiseToProvider &&
        world.tamper->via_mobile && m.compromised) {
        registered_noise = AttackerPub(world);
        world.tamper->applied = true;
    }
    WithdrawalConstraints registered_w = world.user.intended.w;
    if (world.tamper && world.tamper->datum == TamperPlan::Datum::ConstraintW &&
        world.tamper->via_mobile && m.compromised) {
        registered_w.max_withdrawals_per_window += 100;
        world.tamper->applied = true;
    }

    m.wt_accounts.clear();
    m.onion_ids.clear();
    for (uint32_t k = 1; k <= n; ++k) {
        size_t provider = (k - 1) % provider_count;
        WatchtowerState wt;
        wt.id = "wt" + std::to_string(k);
        wt.index = k;
        wt.provider = provider;
        wt.master = ExtendedKey::Master(world.SeedHash("wt-master", k));
        wt.account_index = 1;
        wt.onion = "onion-" + std::to_string(k) + "-1";
        wt.user_noise = registered_noise;
        wt.timelock = cfg.timelock;
        wt.constraints = registered_w;
        world.watchtowers.push_back(std::move(wt));
        world.providers[provider].watchtower_indices.push_back(k);
    }
    for (ProviderState& p : world.providers) {
        p.timelock = cfg.timelock;
        p.constraints = registered_w;
        p.user_noise = registered_noise;
    }
    // The mobile imports { (O_k, W^1_k, y) } for all k, possibly tampered on
    // its own storage path.
    std::vector<ExtendedKey> accounts;
    std::vector<std::string> onions;
    for (const WatchtowerState& wt : world.watchtowers) {
        accounts.push_back(wt.Account().ToPublic());
        onions.push_back(wt.onion);
    }
    m.wt_accounts = MaybeTamperWtAccounts(world, accounts, true);
    m.onion_ids = MaybeTamperOnions(world, onions, true);
    world.Log("setup_watchtowers", "initialized",
              "n=" + std::to_string(n) + " providers=" + std::to_string(provider_count));
    return CeremonyOutcome::Ok();
}

CeremonyOutcome SetupSigners(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    if (!m.master || !m.config) return CeremonyOutcome::Abort("mobile not initialized");
    // Key generation and first accounts to the mobile.
    for (SignerDevice* d : world.Signers()) {
        if (d->id == "mobile") continue;
        d->master = ExtendedKey::Master(world.SeedHash("master", d->signer_index));
        d->account_index = 1;
        m.signer_accounts.emplace(d->signer_index, d->Account().ToPublic());
    }
    // The mobile distributes the complete first-account set plus c.
    for (SignerDevice* d : world.Signers()) {
        if (d->id == "mobile") continue;
        std::map<size_t, ExtendedKey> delivered;
        for (const auto& [idx, account] : m.signer_accounts) {
            ExtendedKey copy = account;
            if (world.tamper && world.tamper->datum == TamperPlan::Datum::SignerAccount &&
                world.tamper->via_mobile && m.compromised && idx == world.tamper->index) {
                ExtendedKey attacker = ExtendedKey::Master(world.SeedHash("attacker-signer"));
                copy = attacker.DeriveChild(1, true).ToPublic();
                world.tamper->applied = true;
            }
            delivered.emplace(idx, copy);
        }
        // An honest signer recognizes a mismatch of its own entry.
        auto own = delivered.find(d->signer_index);
        if (own != delivered.end() &&
            !(own->second.PublicKey() == d->Account().PublicKey())) {
            world.Log("setup_signers", d->id + " device abort", "own account mismatch");
            return CeremonyOutcome::Abort("device:" + d->id + ": own account mismatch");
        }
        d->signer_accounts = delivered;
        d->config = *m.config;
        // The user verifies the displayed configuration against their choice.
        world.user.Compare("config on " + d->id,
                           HexStr(world.user.intended.SerializeForHash()),
                           HexStr(d->config->SerializeForHash()));
        if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);
    }
    world.Log("setup_signers", "accounts exchanged");
    return CeremonyOutcome::Ok();
}

CeremonyOutcome SetupFinalize(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    if (world.watchtowers.empty()) return CeremonyOutcome::Abort("no watchtowers initialized");

    // The computer retrieves the provider copies over its own channel; the
    // user verifies the legible parts of the SLA.
    std::vector<ExtendedKey> computer_accounts;
    std::vector<std::string> computer_onions;
    for (const WatchtowerState& wt : world.watchtowers) {
        computer_accounts.push_back(wt.Account().ToPublic());
        computer_onions.push_back(wt.onion);
    }
    computer_accounts = MaybeTamperWtAccounts(world, computer_accounts, false);
    computer_onions = MaybeTamperOnions(world, computer_onions, false);
    GroupPoint computer_noise = *world.providers[0].user_noise;

    const AjoloteConfig& intended = world.user.intended;
    world.user.Compare("sla timelock", std::to_string(intended.timelock),
                       std::to_string(world.providers[0].timelock));
    world.user.Compare("sla constraints", HexStr(Bytes(1, 1)),
                       world.providers[0].constraints == intended.w ? HexStr(Bytes(1, 1))
                                                                    : HexStr(Bytes(1, 0)));
    if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);

    for (SignerDevice* d : world.Signers()) {
        if (d->id == "mobile") continue;
        // From the mobile: ({W}, {O}, p_noise); from the computer: ({W}, {O},
        // P_noise).
        const std::vector<ExtendedKey>& mobile_accounts = m.wt_accounts;
        const std::vector<std::string>& mobile_onions = m.onion_ids;
        // Noise correspondence check.
        if (!m.noise_priv || !(GroupPoint::MulGen(*m.noise_priv) == computer_noise)) {
            world.Log("setup_finalize", d->id + " device abort", "noise key mismatch");
            return CeremonyOutcome::Abort("device:" + d->id + ": noise key mismatch");
        }
        // Pairwise consistency count across the two paths.
        size_t consistent = 0;
        size_t pairs = std::min(mobile_accounts.size(), computer_accounts.size());
        std::vector<ExtendedKey> accepted_accounts;
        std::vector<std::string> accepted_onions;
        for (size_t k = 0; k < pairs; ++k) {
            bool match = mobile_accounts[k].PublicKey() == computer_accounts[k].PublicKey() &&
                         k < mobile_onions.size() && k < computer_onions.size() &&
                         mobile_onions[k] == computer_onions[k];
            if (match) {
                consistent += 1;
                accepted_accounts.push_back(mobile_accounts[k]);
                accepted_onions.push_back(mobile_onions[k]);
            }
        }
        // The signer displays how many watchtower entries were consistent;
        // the user expects all N.
        world.user.Compare("watchtower count on " + d->id,
                           std::to_string(world.user.intended.watchtowers),
                           std::to_string(consistent));
        if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);
        d->wt_accounts = accepted_accounts;
        d->onion_ids = accepted_onions;
        d->noise_priv = m.noise_priv;
        d->noise_pub = computer_noise;
    }
    world.Log("setup_finalize", "credentials distributed");
    return CeremonyOutcome::Ok();
}

namespace {

// Each device constructs the shared test transaction from its own state.
struct TestView {
    Transaction tx;
    Bytes32 txid;
    BuiltTree tree;
    AjolotePolicies pol;
};

TestView BuildTestView(const AjoloteWorld& world, const SignerDevice& device)
{
    TestView out;
    out.pol = world.PoliciesFromDevice(device, 0, 0, std::nullopt, std::nullopt);
    out.tree = BuildTestTree(out.pol);
    Transaction tx;
    tx.inputs.push_back(TxInput{Bytes32{}, 0, 0xffffffff, {}});
    tx.outputs.push_back(TxOutput{5000, out.tree.script});
    out.tx = tx;
    out.txid = Txid(tx);
    return out;
}

Bytes32 TestDigest(const TestView& view)
{
    Bytes script = view.tree.script;
    PrevoutView fake = [script](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == Bytes32{} && o.index == 0) return TxOutput{5000, script};
        return std::nullopt;
    };
    return SighashMsg(view.tx, 0, Semantics::Taproot, SIGHASH_ALL, fake);
}

} // namespace

CeremonyOutcome SetupTest(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    if (m.wt_accounts.empty()) return CeremonyOutcome::Abort("setup incomplete");

    TestView mobile_view = BuildTestView(world, m);
    Bytes32 mobile_digest = TestDigest(mobile_view);

    // Watchtower signatures over the mobile's transaction. A compromised
    // mobile holding a planted watchtower key fabricates that signature.
    std::map<size_t, Signature> wt_sigs;
    for (WatchtowerState& wt : world.watchtowers) {
        wt_sigs[wt.index] = Sign(wt.Account().PrivateKey(), mobile_digest);
    }
    if (world.tamper && world.tamper->datum == TamperPlan::Datum::WtAccount &&
        world.tamper->via_mobile && world.tamper->via_computer && m.compromised) {
        ExtendedKey attacker_master = ExtendedKey::Master(world.SeedHash("attacker-wt-master"));
        size_t idx = world.tamper->index % world.watchtowers.size();
        wt_sigs[idx + 1] = Sign(attacker_master.DeriveChild(1, true).PrivateKey(), mobile_digest);
    }

    for (SignerDevice* d : world.Signers()) {
        if (d->id == "mobile") continue;
        TestView view = BuildTestView(world, *d);
        Bytes32 digest = TestDigest(view);
        // Verify each watchtower signature against the signer's own data.
        for (size_t k = 1; k <= d->wt_accounts.size(); ++k) {
            auto sig = wt_sigs.find(k);
            if (sig == wt_sigs.end() ||
                !Verify(d->wt_accounts[k - 1].PublicKey(), digest, sig->second)) {
                world.Log("setup_test", d->id + " device abort",
                          "watchtower signature " + std::to_string(k) + " invalid");
                return CeremonyOutcome::Abort("device:" + d->id + ": watchtower signature invalid");
            }
        }
        // The user matches the transaction id and setup hash on both screens.
        world.user.Compare("test txid on " + d->id, HexStr(mobile_view.txid).substr(0, 16),
                           HexStr(view.txid).substr(0, 16));
        world.user.Compare("setup hash on " + d->id, HexStr(world.SetupHash(m)).substr(0, 16),
                           HexStr(world.SetupHash(*d)).substr(0, 16));
        if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);
    }

    // Signer test signatures cross-verified by the mobile and home signer.
    std::map<size_t, Signature> signer_sigs;
    for (SignerDevice* d : world.Signers()) {
        signer_sigs[d->signer_index] = Sign(d->Account().PrivateKey(), mobile_digest);
    }
    for (SignerDevice* verifier : {&world.mobile, &world.home}) {
        for (const auto& [n, sig] : signer_sigs) {
            auto account = verifier->signer_accounts.find(n);
            if (account == verifier->signer_accounts.end() ||
                !Verify(account->second.PublicKey(), mobile_digest, sig)) {
                world.Log("setup_test", verifier->id + " device abort",
                          "signer signature " + std::to_string(n) + " invalid");
                return CeremonyOutcome::Abort("device:" + verifier->id +
                                              ": signer signature invalid");
            }
        }
    }
    world.Log("setup_test", "success", "all devices consistent");
    return CeremonyOutcome::Ok();
}

CeremonyOutcome RunFullSetup(AjoloteWorld& world)
{
    for (auto step : {&SetupMobile, &SetupWatchtowers, &SetupSigners, &SetupFinalize, &SetupTest}) {
        CeremonyOutcome r = (*step)(world);
        if (!r.ok) return r;
    }
    return CeremonyOutcome::Ok("setup complete");
}

CeremonyOutcome Receive(AjoloteWorld& world, uint64_t amount)
{
    SignerDevice& m = world.mobile;
    SignerDevice& h = world.home;
    if (m.signer_accounts.size() < SIGNER_COUNT) return CeremonyOutcome::Abort("setup incomplete");

    uint32_t cursor = m.cursor_h;
    AjolotePolicies mobile_pol = world.PoliciesFromDevice(m, cursor, 0, std::nullopt, std::nullopt);
    BuiltTree mobile_tree = BuildReceiveTree(mobile_pol);
    AjolotePolicies home_pol = world.PoliciesFromDevice(h, cursor, 0, std::nullopt, std::nullopt);
    BuiltTree home_tree = BuildReceiveTree(home_pol);

    // The user verifies the mobile-generated address against the signer.
    world.user.Compare("receive address", HexStr(mobile_tree.script), HexStr(home_tree.script));
    if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);

    // Counter-party payment.
    Outpoint funding = world.chain.Mint(amount + 500, Bytes{0xfd});
    Transaction rec;
    rec.inputs.push_back(TxInput{funding.txid, funding.index, 0xffffffff, {}});
    rec.outputs.push_back(TxOutput{amount, mobile_tree.script});
    SubmitResult r = world.chain.Submit(rec);
    if (!r.accepted) return CeremonyOutcome::Abort("receive rejected: " + RejectReasonName(r.reason));

    ReceiveCoin coin{Outpoint{Txid(rec), 0}, amount, cursor, m.account_index, mobile_pol.keys};
    m.receive_coins.push_back(coin);
    h.receive_coins.push_back(coin);
    m.cursor_h += 1;
    h.cursor_h += 1;
    world.known_scripts[mobile_tree.script] = AjoloteOutputType::Receive;
    world.ops_tx_count += 1;
    world.Log("receive", "payment received",
              "amount=" + std::to_string(amount) + " h=" + std::to_string(cursor));
    return CeremonyOutcome::Ok();
}

namespace {

// Spends the given receive coins into `outputs`; witnesses use the 2-of-2
// receive leaf signed by the mobile and home signer.
Transaction SpendReceiveCoins(AjoloteWorld& world, const std::vector<ReceiveCoin>& coins,
                              std::vector<TxOutput> outputs, uint64_t* fee_out)
{
    Transaction tx;
    for (const ReceiveCoin& c : coins) {
        tx.inputs.push_back(TxInput{c.outpoint.txid, c.outpoint.index, 0xffffffff, {}});
    }
    tx.outputs = std::move(outputs);

    PrevoutView view = world.chain.UtxoView();
    auto witness_all = [&](bool placeholder) {
        tx.witnesses.assign(tx.inputs.size(), {});
        for (size_t i = 0; i < coins.size(); ++i) {
            AjolotePolicies pol = PoliciesFromKeys(coins[i].keys);
            BuiltTree tree = BuildReceiveTree(pol);
            if (placeholder) {
                tx.witnesses[i] = PlaceholderWitness(tree, 0, pol, 0);
            } else {
                SignatureOracle oracle =
                    DeviceOracle({&world.mobile, &world.home}, {}, coins[i].account_i,
                                 coins[i].cursor_h, 0, {}, tx, i, view, pol.keys);
                tx.witnesses[i] = LeafWitness(tree, 0, pol, oracle, 0);
            }
        }
    };
    witness_all(true);
    uint64_t fee = COVENANT_FEERATE * TxSize(tx);
    if (fee_out) *fee_out = fee;
    witness_all(false);
    return tx;
}

} // namespace

uint64_t FullDepositAmount(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    PrevoutView spendable = world.chain.UtxoView();
    std::vector<ReceiveCoin> coins;
    uint64_t in_sum = 0;
    for (const ReceiveCoin& c : m.receive_coins) {
        if (spendable(c.outpoint)) {
            coins.push_back(c);
            in_sum += c.amount;
        }
    }
    if (coins.empty()) return 0;
    std::vector<TxOutput> probe{TxOutput{in_sum, Bytes(33, 0x01)}};
    uint64_t fee = 0;
    SpendReceiveCoins(world, coins, probe, &fee);
    return in_sum > fee ? in_sum - fee : 0;
}

CeremonyOutcome VaultDeposit(AjoloteWorld& world, uint64_t amount)
{
    SignerDevice& m = world.mobile;
    SignerDevice& h = world.home;
    if (!m.config) return CeremonyOutcome::Abort("setup incomplete");
    const AjoloteConfig& cfg = *m.config;

    // The home signer enforces the configured amount range.
    if (amount < cfg.v_min || amount > cfg.v_max) {
        world.Log("vault_deposit", "home device abort", "amount outside [V_min, V_max]");
        return CeremonyOutcome::Abort("ConstraintViolation: amount outside [V_min, V_max]");
    }

    // Select receive coins covering amount + fee allowance. In-mempool
    // outputs are spendable as packages.
    PrevoutView spendable = world.chain.UtxoView();
    std::vector<ReceiveCoin> available;
    for (const ReceiveCoin& c : m.receive_coins) {
        if (spendable(c.outpoint)) available.push_back(c);
    }
    std::sort(available.begin(), available.end(),
              [](const ReceiveCoin& a, const ReceiveCoin& b) { return a.amount > b.amount; });
    std::vector<ReceiveCoin> selected;
    uint64_t in_sum = 0;
    const uint64_t fee_allowance = 60000; // generous bound, trimmed below
    for (const ReceiveCoin& c : available) {
        if (in_sum >= amount + fee_allowance) break;
        selected.push_back(c);
        in_sum += c.amount;
    }
    if (in_sum < amount) return CeremonyOutcome::Abort("insufficient receive balance");

    uint64_t v = world.next_vault_index++;
    uint32_t j = m.cursor_j;

    // Ephemeral enforcement pair: e1 on the mobile, e2 on the home signer.
    KeyPair e1 = KeypairGen(world.SeedHash("enf-1", v));
    KeyPair e2 = KeypairGen(world.SeedHash("enf-2", v));

    AjolotePolicies pol = world.PoliciesFromDevice(m, m.cursor_h, j, e1.pub, e2.pub);
    std::optional<GroupPoint> internal;
    if (world.per_vault_internal_keys) internal = PerVaultInternalKey(v, world.SetupHash(m));
    BuiltTree vault_tree = BuildVaultTree(pol, internal);
    BuiltTree unvault_tree = BuildUnvaultTree(pol, cfg.timelock, cfg.watchtowers, internal);
    BuiltTree fb_tree = BuildFallbackTree(pol, internal);

    // TX_dep: selected receive coins -> vault output (+ change receive).
    uint32_t change_cursor = m.cursor_h;
    AjolotePolicies change_pol =
        world.PoliciesFromDevice(m, change_cursor, 0, std::nullopt, std::nullopt);
    BuiltTree change_tree = BuildReceiveTree(change_pol);
    std::vector<TxOutput> dep_outputs{TxOutput{amount, vault_tree.script}};
    bool has_change = false;
    {
        // Measure with a provisional change output to fix the fee.
        std::vector<TxOutput> probe = dep_outputs;
        probe.push_back(TxOutput{1000, change_tree.script});
        Transaction draft = SpendReceiveCoins(world, selected, probe, nullptr);
        uint64_t fee = COVENANT_FEERATE * TxSize(draft);
        if (in_sum > amount + fee + 1000) {
            dep_outputs.push_back(TxOutput{in_sum - amount - fee, change_tree.script});
            has_change = true;
        }
    }
    uint64_t dep_fee = 0;
    Transaction tx_dep = SpendReceiveCoins(world, selected, dep_outputs, &dep_fee);
    if (has_change) {
        // Recompute the change against the measured fee.
        tx_dep.outputs[1].amount = in_sum - amount - dep_fee;
        uint64_t refreshed = 0;
        tx_dep = SpendReceiveCoins(world, selected, tx_dep.outputs, &refreshed);
    }
    Bytes32 dep_txid = Txid(tx_dep);

    // TX_wit: vault output -> unvault output at 40 sat/B.
    Transaction tx_wit;
    tx_wit.inputs.push_back(TxInput{dep_txid, 0, 0xffffffff, {}});
    tx_wit.outputs.push_back(TxOutput{amount, unvault_tree.script});
    {
        Transaction probe = tx_wit;
        probe.witnesses.assign(1, PlaceholderWitness(vault_tree, 0, pol, 0));
        uint64_t fee = COVENANT_FEERATE * TxSize(probe);
        // The home signer refuses deposits too small to fund the covenant
        // pair at the pinned feerate.
        if (amount < 2 * fee + 2000) {
            world.Log("vault_deposit", "home device abort", "amount cannot fund covenant fees");
            return CeremonyOutcome::Abort("ConstraintViolation: amount cannot fund covenant fees");
        }
        tx_wit.outputs[0].amount = amount - fee;
    }
    Bytes32 wit_txid = Txid(tx_wit);
    uint64_t unvault_amount = tx_wit.outputs[0].amount;

    // TX_fb: unvault output -> fall-back output; sized for the deepest
    // control block so the feerate holds whichever leaf fires.
    Transaction tx_fb;
    tx_fb.inputs.push_back(TxInput{wit_txid, 0, 0xffffffff, {}});
    tx_fb.outputs.push_back(TxOutput{unvault_amount, fb_tree.script});
    {
        Transaction probe = tx_fb;
        size_t deepest = 2 + SIGNER_COUNT + cfg.watchtowers - 1;
        probe.witnesses.assign(1, PlaceholderWitness(unvault_tree, deepest, pol, 0));
        uint64_t fee = COVENANT_FEERATE * TxSize(probe);
        if (unvault_amount < fee + 1000) {
            world.Log("vault_deposit", "home device abort", "amount cannot fund covenant fees");
            return CeremonyOutcome::Abort("ConstraintViolation: amount cannot fund covenant fees");
        }
        tx_fb.outputs[0].amount = unvault_amount - fee;
    }
    Bytes32 fb_txid = Txid(tx_fb);

    // Enforcement signatures over both covenant transactions.
    Bytes vault_spk = vault_tree.script;
    PrevoutView wit_view = [dep_txid, amount, vault_spk](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == dep_txid && o.index == 0) return TxOutput{amount, vault_spk};
        return std::nullopt;
    };
    Bytes unvault_spk = unvault_tree.script;
    PrevoutView fb_view =
        [wit_txid, unvault_amount, unvault_spk](const Outpoint& o) -> std::optional<TxOutput> {
        if (o.txid == wit_txid && o.index == 0) return TxOutput{unvault_amount, unvault_spk};
        return std::nullopt;
    };
    Signature sig_wit_1 = SignInput(tx_wit, 0, e1.priv, Semantics::Taproot, SIGHASH_ALL, wit_view);
    Signature sig_wit_2 = SignInput(tx_wit, 0, e2.priv, Semantics::Taproot, SIGHASH_ALL, wit_view);
    Signature sig_fb_1 = SignInput(tx_fb, 0, e1.priv, Semantics::Taproot, SIGHASH_ALL, fb_view);
    Signature sig_fb_2 = SignInput(tx_fb, 0, e2.priv, Semantics::Taproot, SIGHASH_ALL, fb_view);

    // Watchtower registration: record, control block and verification.
    for (WatchtowerState& wt : world.watchtowers) {
        size_t leaf_index = 2 + SIGNER_COUNT + (wt.index - 1);
        TapLeaf leaf = unvault_tree.LeafFor(leaf_index, pol.keys);
        ControlBlock cb = ProveInclusion(unvault_tree.tree, leaf, unvault_tree.internal_key);
        auto unvault_key = TaprootScriptKey(unvault_tree.script);
        if (!unvault_key || !VerifyControlBlock(*unvault_key, leaf, cb)) {
            world.Log("vault_deposit", wt.id + " abort", "control block mismatch");
            return CeremonyOutcome::Abort(wt.id + " rejected the control block");
        }
        if (!VerifyInput(tx_wit, 0, e1.pub, sig_wit_1, Semantics::Taproot, SIGHASH_ALL, wit_view) ||
            !VerifyInput(tx_fb, 0, e2.pub, sig_fb_2, Semantics::Taproot, SIGHASH_ALL, fb_view)) {
            world.Log("vault_deposit", wt.id + " abort", "enforcement signature invalid");
            return CeremonyOutcome::Abort(wt.id + " rejected an enforcement signature");
        }
        WtVaultRecord record;
        record.vault_index = v;
        record.tx_dep = tx_dep;
        record.tx_wit = tx_wit;
        record.tx_fb = tx_fb;
        record.sig_wit_1 = sig_wit_1;
        record.sig_wit_2 = sig_wit_2;
        record.sig_fb_1 = sig_fb_1;
        record.sig_fb_2 = sig_fb_2;
        record.control_block = cb;
        record.fb_leaf_script = leaf.script;
        record.cursor_j = j;
        record.account_i = m.account_index;
        record.e1 = e1.pub;
        record.e2 = e2.pub;
        record.keys = pol.keys;
        wt.vaults.push_back(std::move(record));
    }

    // Key deletion after the watchtowers acknowledged storage.
    Keystore mobile_store, home_store;
    mobile_store.Put("e1", e1.priv);
    home_store.Put("e2", e2.priv);
    world.deletion_records.emplace("v" + std::to_string(v) + "/e1",
                                   mobile_store.DeleteKey("e1", world.deletion_method));
    world.deletion_records.emplace("v" + std::to_string(v) + "/e2",
                                   home_store.DeleteKey("e2", world.deletion_method));

    // Broadcast the deposit.
    SubmitResult r = world.chain.Submit(tx_dep);
    if (!r.accepted) return CeremonyOutcome::Abort("deposit rejected: " + RejectReasonName(r.reason));
    world.pending_deposit_acks.push_back({v, dep_txid});

    VaultRecord record;
    record.vault_index = v;
    record.tx_dep = tx_dep;
    record.tx_wit = tx_wit;
    record.tx_fb = tx_fb;
    record.sig_wit_1 = sig_wit_1;
    record.sig_wit_2 = sig_wit_2;
    record.sig_fb_1 = sig_fb_1;
    record.sig_fb_2 = sig_fb_2;
    record.e1 = e1.pub;
    record.e2 = e2.pub;
    record.cursor_j = j;
    record.account_i = m.account_index;
    record.keys = pol.keys;
    m.vaults.push_back(record);
    h.vaults.push_back(record);
    m.cursor_j += 1;
    h.cursor_j += 1;

    // Wallet bookkeeping.
    std::set<std::pair<Bytes32, uint32_t>> spent;
    for (const ReceiveCoin& c : selected) spent.insert({c.outpoint.txid, c.outpoint.index});
    auto prune = [&](std::vector<ReceiveCoin>& coins) {
        coins.erase(std::remove_if(coins.begin(), coins.end(),
                                   [&](const ReceiveCoin& c) {
                                       return spent.count({c.outpoint.txid, c.outpoint.index}) > 0;
                                   }),
                    coins.end());
    };
    prune(m.receive_coins);
    prune(h.receive_coins);
    if (has_change) {
        ReceiveCoin change{Outpoint{dep_txid, 1}, tx_dep.outputs[1].amount, change_cursor,
                           m.account_index, change_pol.keys};
        m.receive_coins.push_back(change);
        h.receive_coins.push_back(change);
        m.cursor_h += 1;
        h.cursor_h += 1;
        world.known_scripts[change_tree.script] = AjoloteOutputType::Receive;
    }
    world.known_scripts[vault_tree.script] = AjoloteOutputType::Vault;
    world.known_scripts[unvault_tree.script] = AjoloteOutputType::Unvault;
    world.known_scripts[fb_tree.script] = AjoloteOutputType::Fallback;
    world.fb_coins.push_back(FbCoin{Outpoint{fb_txid, 0}, tx_fb.outputs[0].amount, j,
                                    m.account_index, pol.keys});
    world.ops_tx_count += 1;
    world.Log("vault_deposit", "registered",
              "v=" + std::to_string(v) + " amount=" + std::to_string(amount));
    return CeremonyOutcome::Ok("vault " + std::to_string(v));
}

namespace {

const VaultRecord* FindVault(const SignerDevice& device, uint64_t vault_index)
{
    for (const VaultRecord& v : device.vaults) {
        if (v.vault_index == vault_index) return &v;
    }
    return nullptr;
}

} // namespace

CeremonyOutcome Withdraw(AjoloteWorld& world, uint64_t vault_index,
                         const std::string& second_device)
{
    SignerDevice& m = world.mobile;
    const VaultRecord* record = FindVault(m, vault_index);
    if (!record) return CeremonyOutcome::Abort("unknown vault");
    SignerDevice* second = world.DeviceById(second_device);
    if (!second || second->decommissioned) return CeremonyOutcome::Abort("signer unavailable");

    AjolotePolicies pol = PoliciesFromKeys(record->keys);
    std::optional<GroupPoint> internal;
    if (world.per_vault_internal_keys) {
        internal = PerVaultInternalKey(vault_index, world.SetupHash(m));
    }
    BuiltTree vault_tree = BuildVaultTree(pol, internal);

    Transaction tx = record->tx_wit;
    PrevoutView view = world.chain.UtxoView();
    std::map<std::string, Bytes> stored{
        {"E1", EncodeSigElement(record->sig_wit_1, SIGHASH_ALL)},
        {"E2", EncodeSigElement(record->sig_wit_2, SIGHASH_ALL)}};
    size_t leaf = second->signer_index == 2 ? 0 : 1;
    SignatureOracle oracle = DeviceOracle({&m, second}, {}, record->account_i, 0,
                                          record->cursor_j, stored, tx, 0, view, pol.keys);
    tx.witnesses.assign(1, LeafWitness(vault_tree, leaf, pol, oracle, 0));
    SubmitResult r = world.chain.Submit(tx);
    world.ops_tx_count += 1;
    world.Log("withdraw", "broadcast",
              "v=" + std::to_string(vault_index) + " " +
                  (r.accepted ? "accepted" : RejectReasonName(r.reason)));
    if (!r.accepted) return CeremonyOutcome::Abort(RejectReasonName(r.reason));
    return CeremonyOutcome::Ok();
}

uint64_t FullSpendAmount(AjoloteWorld& world, uint64_t vault_index)
{
    SignerDevice& m = world.mobile;
    const VaultRecord* record = nullptr;
    for (const VaultRecord& v : m.vaults) {
        if (v.vault_index == vault_index) record = &v;
    }
    if (!record || !m.config) return 0;
    auto coin = world.chain.LookupUtxo({record->WitTxid(), 0});
    if (!coin) return 0;
    AjolotePolicies pol = PoliciesFromKeys(record->keys);
    std::optional<GroupPoint> internal;
    if (world.per_vault_internal_keys) {
        internal = PerVaultInternalKey(vault_index, world.SetupHash(m));
    }
    BuiltTree unvault_tree =
        BuildUnvaultTree(pol, m.config->timelock, m.config->watchtowers, internal);
    Transaction probe;
    probe.inputs.push_back(TxInput{record->WitTxid(), 0, m.config->timelock, {}});
    probe.outputs.push_back(TxOutput{coin->amount, Bytes{0xe0, 0x00}});
    probe.witnesses.assign(1, PlaceholderWitness(unvault_tree, 0, pol, m.config->timelock));
    uint64_t fee = COVENANT_FEERATE * TxSize(probe);
    return coin->amount > fee ? coin->amount - fee : 0;
}

CeremonyOutcome Spend(AjoloteWorld& world, uint64_t vault_index, uint64_t amount)
{
    SignerDevice& m = world.mobile;
    const VaultRecord* record = FindVault(m, vault_index);
    if (!record) return CeremonyOutcome::Abort("unknown vault");
    const AjoloteConfig& cfg = *m.config;

    Bytes32 wit_txid = record->WitTxid();
    auto unvault_coin = world.chain.LookupUtxo({wit_txid, 0});
    if (!unvault_coin) return CeremonyOutcome::Abort("unvault output not available");
    uint64_t unvault_amount = unvault_coin->amount;
    if (amount >= unvault_amount) return CeremonyOutcome::Abort("amount exceeds unvault output");

    AjolotePolicies pol = PoliciesFromKeys(record->keys);
    std::optional<GroupPoint> internal;
    if (world.per_vault_internal_keys) {
        internal = PerVaultInternalKey(vault_index, world.SetupHash(m));
    }
    BuiltTree unvault_tree = BuildUnvaultTree(pol, cfg.timelock, cfg.watchtowers, internal);

    uint32_t change_cursor = m.cursor_h;
    AjolotePolicies change_pol =
        world.PoliciesFromDevice(m, change_cursor, 0, std::nullopt, std::nullopt);
    BuiltTree change_tree = BuildReceiveTree(change_pol);

    Transaction tx;
    tx.inputs.push_back(TxInput{wit_txid, 0, cfg.timelock, {}});
    Bytes dest{0xe0};
    dest.push_back(static_cast<uint8_t>(vault_index & 0xff));
    tx.outputs.push_back(TxOutput{amount, dest});
    tx.outputs.push_back(TxOutput{unvault_amount - amount, change_tree.script});

    uint32_t age = 0;
    if (auto a = world.chain.ConfirmedAge(wit_txid)) age = static_cast<uint32_t>(*a);
    {
        Transaction probe = tx;
        probe.witnesses.assign(1, PlaceholderWitness(unvault_tree, 0, pol, cfg.timelock));
        uint64_t fee_with_change = COVENANT_FEERATE * TxSize(probe);
        if (amount + fee_with_change < unvault_amount &&
            unvault_amount - amount - fee_with_change >= 1000) {
            tx.outputs[1].amount = unvault_amount - amount - fee_with_change;
        } else {
            // Dust-sized change is folded into the fee.
            tx.outputs.resize(1);
            Transaction single = tx;
            single.witnesses.assign(1, PlaceholderWitness(unvault_tree, 0, pol, cfg.timelock));
            uint64_t fee_single = COVENANT_FEERATE * TxSize(single);
            if (amount + fee_single > unvault_amount) {
                return CeremonyOutcome::Abort("amount leaves no fee");
            }
        }
    }
    PrevoutView view = world.chain.UtxoView();
    SignatureOracle oracle = DeviceOracle({&m, &world.home}, {}, record->account_i, 0,
                                          record->cursor_j, {}, tx, 0, view, pol.keys);
    WitnessStack w;
    try {
        w = LeafWitness(unvault_tree, 0, pol, oracle, age);
    } catch (const Unsatisfiable& e) {
        return CeremonyOutcome::Abort(std::string("PrematureLock: ") + e.what());
    }
    tx.witnesses.assign(1, w);
    SubmitResult r = world.chain.Submit(tx);
    world.ops_tx_count += 1;
    world.Log("spend", "broadcast",
              "v=" + std::to_string(vault_index) + " " +
                  (r.accepted ? "accepted" : RejectReasonName(r.reason)));
    if (!r.accepted) return CeremonyOutcome::Abort(RejectReasonName(r.reason));
    if (tx.outputs.size() > 1) {
        ReceiveCoin change{Outpoint{Txid(tx), 1}, tx.outputs[1].amount, change_cursor,
                           m.account_index, change_pol.keys};
        m.receive_coins.push_back(change);
        world.home.receive_coins.push_back(change);
        m.cursor_h += 1;
        world.home.cursor_h += 1;
        world.known_scripts[change_tree.script] = AjoloteOutputType::Receive;
    }
    return CeremonyOutcome::Ok();
}

CeremonyOutcome ManualReject(AjoloteWorld& world, uint64_t vault_index)
{
    SignerDevice& m = world.mobile;
    const VaultRecord* record = FindVault(m, vault_index);
    if (!record) return CeremonyOutcome::Abort("unknown vault");
    const AjoloteConfig& cfg = *m.config;

    AjolotePolicies pol = PoliciesFromKeys(record->keys);
    std::optional<GroupPoint> internal;
    if (world.per_vault_internal_keys) {
        internal = PerVaultInternalKey(vault_index, world.SetupHash(m));
    }
    BuiltTree unvault_tree = BuildUnvaultTree(pol, cfg.timelock, cfg.watchtowers, internal);

    Transaction tx = record->tx_fb;
    PrevoutView view = world.chain.UtxoView();
    std::map<std::string, Bytes> stored{
        {"E1", EncodeSigElement(record->sig_fb_1, SIGHASH_ALL)},
        {"E2", EncodeSigElement(record->sig_fb_2, SIGHASH_ALL)}};
    // The mobile uses its own pay-to-fallback leaf (U1).
    size_t leaf_index = 2; // first enforcement leaf: thresh(3, E1, E2, U1)
    SignatureOracle oracle =
        DeviceOracle({&m}, {}, record->account_i, 0, record->cursor_j, stored, tx, 0, view,
                     pol.keys);
    tx.witnesses.assign(1, LeafWitness(unvault_tree, leaf_index, pol, oracle, 0));
    SubmitResult r = world.chain.Submit(tx);
    world.Log("reject", "mobile-initiated fall-back",
              "v=" + std::to_string(vault_index) + " " +
                  (r.accepted ? "accepted" : RejectReasonName(r.reason)));
    if (!r.accepted) return CeremonyOutcome::Abort(RejectReasonName(r.reason));
    return CeremonyOutcome::Ok();
}

CeremonyOutcome HealthCheck(AjoloteWorld& world)
{
    SignerDevice& m = world.mobile;
    Bytes32 mobile_setup = world.SetupHash(m);
    Bytes32 mobile_op = world.OperationHash(m.vaults);

    // Watchtowers report a signed operation hash.
    std::vector<std::pair<size_t, Bytes32>> wt_hashes;
    for (WatchtowerState& wt : world.watchtowers) {
        if (!wt.online) continue;
        wt_hashes.push_back({wt.index, world.OperationHashWt(wt.vaults)});
    }

    for (SignerDevice* d : world.Signers()) {
        if (d->id == "mobile" || d->decommissioned) continue;
        world.user.Compare("health setup hash on " + d->id, HexStr(mobile_setup).substr(0, 16),
                           HexStr(world.SetupHash(*d)).substr(0, 16));
        if (world.user.aborted) return CeremonyOutcome::Abort(world.user.abort_reason);
    }
    // Only the home signer can recompute the operation hash itself.
    Bytes32 home_op = world.OperationHash(world.home.vaults);
    if (!(home_op == mobile_op)) {
        world.Log("health_check", "home device abort", "operation hash mismatch");
        return CeremonyOutcome::Abort("device:home: operation hash mismatch");
    }
    for (const auto& [k, hash] : wt_hashes) {
        if (!(hash == home_op)) {
            world.Log("health_check", "home device abort",
                      "wt" + std::to_string(k) + " operation hash mismatch");
            return CeremonyOutcome::Abort("device:home: watchtower state inconsistent");
        }
    }
    world.Log("health_check", "success");
    return CeremonyOutcome::Ok();
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "cli/runner.h"

#include "ajolote/ceremonies.h"
#include "ajolote/coincontrol.h"
#include "ajolote/recovery.h"
#include "analysis/observer.h"

#include <fstream>
#include <iostream>

namespace covlab {

namespace {

DeletionMethod ParseDeletionMethod(const std::string& name)
{
    if (name == "dispose") return DeletionMethod::Dispose;
    if (name == "clear") return DeletionMethod::Clear;
    if (name == "purge") return DeletionMethod::Purge;
    if (name == "destroy") return DeletionMethod::Destroy;
    throw ScenarioParseError("unknown deletion method: " + name);
}

/** Scenario-driven adversary: once armed with a vault, it submits a theft
 *  spend the moment the relative lock expires, paying above any fee spike.
 *  Acts before the defenders on every block tick. */
struct Thief {
    bool armed{false};
    uint64_t vault_index{0};
    uint64_t feerate{100};
    bool succeeded{false};
    bool attempted{false};
    // Fee spike launched the moment the withdrawal confirms, so the
    // fall-back response is priced out of the next blocks.
    std::optional<uint64_t> spike_level;
    uint64_t spike_duration{0};
    uint64_t spike_budget{0};

    void Tick(AjoloteWorld& world)
    {
        if (!armed || succeeded) return;
        const VaultRecord* record = nullptr;
        for (const VaultRecord& v : world.mobile.vaults) {
            if (v.vault_index == vault_index) record = &v;
        }
        if (!record) return;
        Bytes32 wit_txid = record->WitTxid();
        auto age = world.chain.ConfirmedAge(wit_txid);
        uint32_t timelock = world.mobile.config->timelock;
        if (spike_level && age) {
            if (spike_budget > 0) world.chain.SetAdversaryFeeBudget(spike_budget);
            world.chain.FeeSpike(*spike_level, spike_duration);
            world.Log("adversary", "fee spike launched",
                      "level=" + std::to_string(*spike_level));
            spike_level.reset();
        }
        if (!age || *age < timelock) return;
        auto coin = world.chain.LookupUtxo({wit_txid, 0});
        if (!coin) {
            armed = false; // the fall-back beat us to it
            return;
        }
        attempted = true;
        AjolotePolicies pol = PoliciesFromKeys(record->keys);
        std::optional<GroupPoint> internal;
        if (world.per_vault_internal_keys) {
            internal = PerVaultInternalKey(vault_index, world.SetupHash(world.mobile));
        }
        BuiltTree unvault = BuildUnvaultTree(pol, timelock, world.mobile.config->watchtowers,
                                             internal);
        Transaction tx;
        tx.inputs.push_back(TxInput{wit_txid, 0, timelock, {}});
        tx.outputs.push_back(TxOutput{coin->amount, Bytes{0xEE, 0x7f}});
        {
            Transaction probe = tx;
            probe.witnesses.assign(1, PlaceholderWitness(unvault, 0, pol, timelock));
            uint64_t fee = feerate * TxSize(probe);
            if (fee >= coin->amount) return;
            tx.outputs[0].amount = coin->amount - fee;
        }
        SignatureOracle oracle =
            DeviceOracle({&world.mobile, &world.home}, {}, record->account_i, 0,
                         record->cursor_j, {}, tx, 0, world.chain.UtxoView(), pol.keys);
        tx.witnesses.assign(1, LeafWitness(unvault, 0, pol, oracle, static_cast<uint32_t>(*age)));
        SubmitResult r = world.chain.Submit(tx);
        world.Log("adversary", "theft spend", r.accepted ? "accepted" : RejectReasonName(r.reason));
        if (r.accepted) succeeded = true;
    }

    bool ConfirmedTheft(const AjoloteWorld& world) const
    {
        if (!succeeded) return false;
        for (const VaultRecord& v : world.mobile.vaults) {
            if (v.vault_index != vault_index) continue;
            // The unvault output went to the theft destination, not TX_fb.
            return world.chain.Confirmations(Txid(v.tx_fb)) == 0 &&
                   !world.chain.LookupUtxo({v.WitTxid(), 0}).has_value();
        }
        return false;
    }
};

struct RunState {
    AjoloteWorld world;
    Thief thief;
    uint64_t initial_balance{0};
    uint64_t max_unlocked_exposure{0};
    std::vector<std::string> event_errors;

    explicit RunState(uint64_t seed, const Scenario& s)
        : world(seed, s.config, s.chain) {}

    void MineTracked(size_t blocks)
    {
        for (size_t i = 0; i < blocks; ++i) {
            world.chain.MineBlock();
            thief.Tick(world); // the adversary is faster than the defenders
            world.ProcessBlocks();
            auto var = world.ValueAtRisk();
            max_unlocked_exposure = std::max(max_unlocked_exposure,
                                             var.tier1_exposure + var.unlocked_tier2_exposure);
        }
    }
};

void ApplyEvent(RunState& state, const ScenarioEvent& ev)
{
    AjoloteWorld& world = state.world;
    auto need = [&](const char* key) {
        if (!ev.args.contains(key)) {
            throw ScenarioParseError("event " + ev.op + " requires '" + key + "'");
        }
        return ev.args.at(key);
    };
    CeremonyOutcome outcome = CeremonyOutcome::Ok();
    if (ev.op == "setup") {
        outcome = RunFullSetup(world);
    } else if (ev.op == "receive") {
        outcome = Receive(world, need("amount").get<uint64_t>());
        state.initial_balance += need("amount").get<uint64_t>();
    } else if (ev.op == "vault_deposit") {
        outcome = VaultDeposit(world, need("amount").get<uint64_t>());
    } else if (ev.op == "vault_deposit_all") {
        outcome = VaultDeposit(world, FullDepositAmount(world));
    } else if (ev.op == "deposit_created_vaults") {
        // Partition the whole receive balance per the coin-control rule and
        // deposit each amount.
        uint64_t balance = 0;
        PrevoutView view = world.chain.UtxoView();
        for (const ReceiveCoin& c : world.mobile.receive_coins) {
            if (view(c.outpoint)) balance += c.amount;
        }
        uint64_t fee_margin = 30000;
        CreatedVaults created =
            CoinControlCreate(balance > fee_margin ? balance - fee_margin : 0,
                              *world.mobile.config);
        for (uint64_t amount : created.amounts) {
            outcome = VaultDeposit(world, amount);
            if (!outcome.ok) break;
            state.MineTracked(1);
        }
    } else if (ev.op == "withdraw") {
        outcome = Withdraw(world, need("vault").get<uint64_t>(),
                           ev.args.value("second_device", std::string("home")));
    } else if (ev.op == "spend") {
        outcome = Spend(world, need("vault").get<uint64_t>(), need("amount").get<uint64_t>());
    } else if (ev.op == "reject") {
        outcome = ManualReject(world, need("vault").get<uint64_t>());
    } else if (ev.op == "health_check") {
        outcome = HealthCheck(world);
    } else if (ev.op == "fallback") {
        int variant = ev.args.value("variant", 1);
        outcome = variant == 1 ? FallbackV1(world)
                               : variant == 2 ? FallbackV2(world) : FallbackV3(world);
    } else if (ev.op == "rotate_accounts") {
        std::set<std::string> decommission;
        if (ev.args.contains("decommission")) {
            for (const auto& d : ev.args.at("decommission")) {
                decommission.insert(d.get<std::string>());
            }
        }
        outcome = RotateAccounts(world, need("index").get<uint32_t>(), decommission);
    } else if (ev.op == "new_mobile") {
        outcome = NewMobile(world);
    } else if (ev.op == "wt_reinit") {
        outcome = WtReinit(world);
    } else if (ev.op == "new_signers") {
        outcome = NewSigners(world, need("device").get<std::string>());
    } else if (ev.op == "send_new_fallback") {
        outcome = SendNewFallback(world);
    } else if (ev.op == "reestablish_tier2") {
        outcome = ReestablishTier2(world, need("amount").get<uint64_t>());
    } else if (ev.op == "mine") {
        state.MineTracked(ev.args.value("blocks", uint64_t{1}));
    } else if (ev.op == "compromise") {
        std::string device = need("device").get<std::string>();
        if (device == "computer") {
            world.computer_compromised = true;
        } else if (SignerDevice* d = world.DeviceById(device)) {
            d->compromised = true;
        } else {
            for (WatchtowerState& wt : world.watchtowers) {
                if (wt.id == device) wt.compromised = true;
            }
        }
        world.Log("adversary", "compromised", device);
    } else if (ev.op == "fee_spike") {
        if (ev.args.contains("budget")) {
            world.chain.SetAdversaryFeeBudget(ev.args.at("budget").get<uint64_t>());
        }
        world.chain.FeeSpike(need("level").get<uint64_t>(), need("duration").get<uint64_t>());
    } else if (ev.op == "thief_withdraw") {
        // Compromised devices broadcast a withdrawal, then race the lock.
        uint64_t vault = need("vault").get<uint64_t>();
        outcome = Withdraw(world, vault);
        state.thief.armed = true;
        state.thief.vault_index = vault;
        state.thief.feerate = ev.args.value("feerate", uint64_t{100});
        if (ev.args.contains("spike_level")) {
            state.thief.spike_level = ev.args.at("spike_level").get<uint64_t>();
            state.thief.spike_duration = ev.args.value("spike_duration", uint64_t{10});
            state.thief.spike_budget = ev.args.value("spike_budget", uint64_t{0});
        }
    } else {
        throw ScenarioParseError("unknown scenario op: " + ev.op);
    }
    if (!outcome.ok) {
        state.event_errors.push_back(ev.op + ": " + outcome.abort_reason);
        world.Log("scenario", ev.op + " failed", outcome.abort_reason);
    }
}

bool EvalAssertion(RunState& state, const ScenarioAssertion& a, std::string& detail)
{
    AjoloteWorld& world = state.world;
    if (a.check == "user_not_aborted") return !world.user.aborted;
    if (a.check == "user_aborted") {
        detail = world.user.abort_reason;
        return world.user.aborted;
    }
    if (a.check == "no_event_errors") {
        if (!state.event_errors.empty()) detail = state.event_errors.front();
        return state.event_errors.empty();
    }
    if (a.check == "reject_confirmed") {
        uint64_t vault = a.args.value("vault", uint64_t{0});
        for (const WatchtowerState& wt : world.watchtowers) {
            for (const WtVaultRecord& r : wt.vaults) {
                if (r.vault_index == vault) {
                    return world.chain.Confirmations(Txid(r.tx_fb)) > 0;
                }
            }
        }
        detail = "vault not registered";
        return false;
    }
    if (a.check == "theft_succeeded") return state.thief.ConfirmedTheft(world);
    if (a.check == "theft_failed") return !state.thief.ConfirmedTheft(world);
    if (a.check == "funds_at_fallback") {
        auto t = world.Classify();
        detail = "vaults=" + std::to_string(t.vault_count) +
                 " unvaults=" + std::to_string(t.unvault_count) +
                 " fallback=" + std::to_string(t.fallback_count);
        return t.vault_count == 0 && t.unvault_count == 0 && t.fallback_count > 0;
    }
    if (a.check == "exposure_max_fraction") {
        uint64_t denom = a.args.value("denominator", uint64_t{20});
        uint64_t cap = state.initial_balance / denom;
        // Tolerate fee dust accumulated in change outputs.
        uint64_t slack = a.args.value("slack", uint64_t{0});
        detail = "max=" + std::to_string(state.max_unlocked_exposure) +
                 " cap=" + std::to_string(cap + slack);
        return state.max_unlocked_exposure <= cap + slack;
    }
    if (a.check == "counts_equal") {
        auto t = world.Classify();
        detail = std::to_string(t.receive_count) + "/" + std::to_string(t.vault_count) + "/" +
                 std::to_string(t.unvault_count);
        return t.receive_count == a.args.value("receive", uint64_t{0}) &&
               t.vault_count == a.args.value("vault", uint64_t{0}) &&
               t.unvault_count == a.args.value("unvault", uint64_t{0});
    }
    if (a.check == "detections") {
        ScanResult scan = ObserverScan(world.chain);
        uint64_t expected = a.args.value("count", uint64_t{0});
        detail = "found=" + std::to_string(scan.sequences.size());
        return scan.sequences.size() == expected;
    }
    if (a.check == "audits_pass") {
        return world.chain.AuditConservation() && world.chain.AuditNoCsvViolation() &&
               world.chain.AuditUtxoReplay();
    }
    detail = "unknown check";
    return false;
}

} // namespace

ScenarioReport RunScenario(const Scenario& scenario, std::optional<uint64_t> seed_override)
{
    uint64_t seed = seed_override.value_or(scenario.seed);
    RunState state(seed, scenario);
    state.world.deletion_method = ParseDeletionMethod(scenario.deletion_method);
    state.world.per_vault_internal_keys = scenario.per_vault_internal_keys;

    for (const ScenarioEvent& ev : scenario.script) {
        ApplyEvent(state, ev);
    }

    ScenarioReport report;
    nlohmann::ordered_json& j = report.json;
    j["seed"] = seed;
    j["config"] = state.world.user.intended.ToJson();

    j["events"] = nlohmann::ordered_json::array();
    for (const CeremonyLogEntry& e : state.world.log) {
        nlohmann::ordered_json je;
        je["ceremony"] = e.ceremony;
        je["event"] = e.event;
        je["detail"] = e.detail;
        j["events"].push_back(je);
    }
    j["chain_events"] = nlohmann::ordered_json::array();
    for (const ChainEvent& e : state.world.chain.EventLog()) {
        j["chain_events"].push_back(e.ToJson());
    }

    nlohmann::ordered_json hashes;
    for (SignerDevice* d : state.world.Signers()) {
        if (!d->master) continue;
        hashes[d->id] = HexStr(state.world.SetupHash(*d));
    }
    j["h_setup"] = hashes;
    j["h_operation"] = HexStr(state.world.OperationHash(state.world.mobile.vaults));

    auto var = state.world.ValueAtRisk();
    nlohmann::ordered_json jvar;
    jvar["tier1_exposure"] = var.tier1_exposure;
    jvar["unlocked_tier2_exposure"] = var.unlocked_tier2_exposure;
    jvar["ops_tx_count"] = var.ops_tx_count;
    jvar["stored_covenant_bytes"] = var.stored_covenant_bytes;
    jvar["max_unlocked_exposure"] = state.max_unlocked_exposure;
    j["value_at_risk"] = jvar;

    j["covenant_statuses"] = nlohmann::ordered_json::array();
    for (const VaultRecord& v : state.world.mobile.vaults) {
        nlohmann::ordered_json jv;
        jv["vault"] = v.vault_index;
        uint64_t depth = state.world.chain.Confirmations(v.DepTxid());
        jv["deposit_confirmations"] = depth;
        jv["status"] = depth >= 6 ? "active" : "pending";
        j["covenant_statuses"].push_back(jv);
    }

    j["detections"] = ObserverScan(state.world.chain).ToJson();

    bool all_pass = true;
    j["assertions"] = nlohmann::ordered_json::array();
    for (const ScenarioAssertion& a : scenario.assertions) {
        std::string detail;
        bool pass = false;
        try {
            pass = EvalAssertion(state, a, detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        nlohmann::ordered_json ja;
        ja["name"] = a.name;
        ja["check"] = a.check;
        ja["pass"] = pass;
        ja["detail"] = detail;
        j["assertions"].push_back(ja);
        all_pass = all_pass && pass;
    }
    j["ok"] = all_pass;
    report.exit_code = all_pass ? 0 : 1;
    report.chain_log = state.world.chain.EventLogLines();
    return report;
}

int RunScenarioFile(const std::string& path, std::optional<uint64_t> seed_override,
                    const std::string& out_path, const std::string& chain_log_path)
{
    Scenario scenario;
    try {
        scenario = Scenario::LoadFile(path);
    } catch (const ScenarioParseError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    }
    ScenarioReport report;
    try {
        report = RunScenario(scenario, seed_override);
    } catch (const ScenarioParseError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << report.Dump();
    } else {
        std::ofstream out(out_path);
        out << report.Dump();
    }
    if (!chain_log_path.empty()) {
        std::ofstream log(chain_log_path);
        log << report.chain_log;
    }
    return report.exit_code;
}

} // namespace covlab

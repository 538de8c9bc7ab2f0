// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "ajolote/world.h"

#include "ajolote/watchtower.h"
#include "crypto/hash.h"

#include <algorithm>

namespace covlab {

ExtendedKey SignerDevice::Account() const
{
    if (!master || account_index == 0) throw IncompleteSetup(id + " has no initialized account");
    return master->DeriveChild(account_index, true);
}

Scalar SignerDevice::OutputPriv(KeyBranch branch, uint32_t cursor) const
{
    return DeriveOutputKey(Account(), branch, cursor).PrivateKey();
}

Scalar SignerDevice::OutputPrivAt(uint32_t account, KeyBranch branch, uint32_t cursor) const
{
    if (!master) throw IncompleteSetup(id + " has no master key");
    return DeriveOutputKey(master->DeriveChild(account, true), branch, cursor).PrivateKey();
}

ExtendedKey WatchtowerState::Account() const
{
    if (!master) throw IncompleteSetup(id + " has no master key");
    return master->DeriveChild(account_index, true);
}

Scalar WatchtowerState::ResponsePriv(uint32_t cursor) const
{
    return Account().DeriveChild(cursor, false).PrivateKey();
}

bool UserModel::Compare(const std::string& label, const std::string& a, const std::string& b)
{
    bool match = a == b;
    checkpoints.push_back(UserCheckpoint{label, match, a, b});
    if (!match && !aborted) {
        aborted = true;
        abort_reason = "user checkpoint mismatch: " + label;
    }
    return match;
}

AjoloteWorld::AjoloteWorld(uint64_t seed, AjoloteConfig cfg, ChainConfig chain_cfg)
    : chain(chain_cfg), m_seed(seed)
{
    user.intended = cfg;
    mobile.id = "mobile";
    mobile.signer_index = 1;
    home.id = "home";
    home.signer_index = 2;
    office.id = "office";
    office.signer_index = 3;
    bank_a.id = "bankA";
    bank_a.signer_index = 4;
    bank_b.id = "bankB";
    bank_b.signer_index = 5;
}

Bytes32 AjoloteWorld::SeedHash(const std::string& label, uint64_t a, uint64_t b) const
{
    return TaggedHashWriter("covlab/world-seed/" + label)
        .WriteU64(m_seed)
        .WriteU64(a)
        .WriteU64(b)
        .Finalize();
}

std::vector<SignerDevice*> AjoloteWorld::Signers()
{
    return {&mobile, &home, &office, &bank_a, &bank_b};
}

SignerDevice* AjoloteWorld::SignerByIndex(size_t n)
{
    for (SignerDevice* d : Signers()) {
        if (d->signer_index == n) return d;
    }
    return nullptr;
}

SignerDevice* AjoloteWorld::DeviceById(const std::string& id)
{
    for (SignerDevice* d : Signers()) {
        if (d->id == id) return d;
    }
    return nullptr;
}

void AjoloteWorld::Log(const std::string& ceremony, const std::string& event,
                       const std::string& detail)
{
    log.push_back(CeremonyLogEntry{ceremony, event, detail});
}

AjolotePolicies AjoloteWorld::PoliciesFromDevice(const SignerDevice& device, uint32_t cursor_h,
                                                 uint32_t cursor_j,
                                                 const std::optional<GroupPoint>& e1,
                                                 const std::optional<GroupPoint>& e2) const
{
    std::vector<ExtendedKey> signer_accounts;
    for (size_t n = 1; n <= SIGNER_COUNT; ++n) {
        auto it = device.signer_accounts.find(n);
        if (it == device.signer_accounts.end()) {
            throw IncompleteSetup(device.id + " is missing account " + std::to_string(n));
        }
        signer_accounts.push_back(it->second);
    }
    return BuildPolicies(signer_accounts, device.wt_accounts, cursor_h, cursor_j, e1, e2);
}

namespace {

void AppendSortedSet(Bytes& out, std::vector<Bytes> items)
{
    std::sort(items.begin(), items.end());
    for (const Bytes& item : items) {
        AppendU32(out, static_cast<uint32_t>(item.size()));
        Append(out, item);
    }
}

} // namespace

Bytes32 AjoloteWorld::SetupHash(const SignerDevice& device) const
{
    // hash({W^i_k} || {A^i_n} || {O_k} || P^Noise || c), each set in
    // lexicographic order of its serialized elements.
    Bytes stream;
    std::vector<Bytes> wt_keys;
    for (const ExtendedKey& w : device.wt_accounts) wt_keys.push_back(w.PublicKey().ToBytes());
    AppendSortedSet(stream, std::move(wt_keys));
    std::vector<Bytes> accounts;
    for (const auto& [n, a] : device.signer_accounts) {
        (void)n;
        accounts.push_back(a.PublicKey().ToBytes());
    }
    AppendSortedSet(stream, std::move(accounts));
    std::vector<Bytes> onions;
    for (const std::string& o : device.onion_ids) onions.push_back(Bytes(o.begin(), o.end()));
    AppendSortedSet(stream, std::move(onions));
    if (device.noise_pub) Append(stream, device.noise_pub->ToBytes());
    if (device.config) Append(stream, device.config->SerializeForHash());
    return TaggedHash("covlab/h-setup", stream);
}

Bytes32 AjoloteWorld::OperationHash(const std::vector<VaultRecord>& vaults) const
{
    // hash({TX_wit} || {TX_fb} || {sig_wit} || {sig_fb} || {(E1, E2)}), sets
    // sorted lexicographically by serialized bytes.
    Bytes stream;
    std::vector<Bytes> wits, fbs, sw, sf, es;
    for (const VaultRecord& v : vaults) {
        wits.push_back(Serialize(v.tx_wit));
        fbs.push_back(Serialize(v.tx_fb));
        Bytes s1(v.sig_wit_1.begin(), v.sig_wit_1.end());
        Bytes s2(v.sig_wit_2.begin(), v.sig_wit_2.end());
        Append(s1, s2);
        sw.push_back(s1);
        Bytes f1(v.sig_fb_1.begin(), v.sig_fb_1.end());
        Bytes f2(v.sig_fb_2.begin(), v.sig_fb_2.end());
        Append(f1, f2);
        sf.push_back(f1);
        Bytes e = v.e1.ToBytes();
        Append(e, v.e2.ToBytes());
        es.push_back(e);
    }
    AppendSortedSet(stream, std::move(wits));
    AppendSortedSet(stream, std::move(fbs));
    AppendSortedSet(stream, std::move(sw));
    AppendSortedSet(stream, std::move(sf));
    AppendSortedSet(stream, std::move(es));
    return TaggedHash("covlab/h-operation", stream);
}

Bytes32 AjoloteWorld::OperationHashWt(const std::vector<WtVaultRecord>& vaults) const
{
    std::vector<VaultRecord> converted;
    for (const WtVaultRecord& v : vaults) {
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
        converted.push_back(std::move(r));
    }
    return OperationHash(converted);
}

void AjoloteWorld::ProcessBlocks()
{
    WatchtowerTick(*this);
    last_processed_height = chain.Height();
}

void AjoloteWorld::MineBlocks(size_t n)
{
    for (size_t i = 0; i < n; ++i) {
        chain.MineBlock();
        ProcessBlocks();
    }
}

AjoloteWorld::Tallies AjoloteWorld::Classify() const
{
    Tallies t;
    for (const auto& [op, coin] : chain.Utxos()) {
        (void)op;
        auto it = known_scripts.find(coin.script);
        if (it == known_scripts.end()) continue;
        switch (it->second) {
        case AjoloteOutputType::Receive:
            t.receive_count++;
            t.receive_value += coin.amount;
            break;
        case AjoloteOutputType::Vault:
            t.vault_count++;
            t.vault_value += coin.amount;
            break;
        case AjoloteOutputType::Unvault:
            t.unvault_count++;
            t.unvault_value += coin.amount;
            break;
        case AjoloteOutputType::Fallback:
            t.fallback_count++;
            t.fallback_value += coin.amount;
            break;
        default:
            break;
        }
    }
    return t;
}

AjoloteWorld::VarMetrics AjoloteWorld::ValueAtRisk() const
{
    VarMetrics m;
    Tallies t = Classify();
    m.tier1_exposure = t.receive_value;
    m.unlocked_tier2_exposure = t.unvault_value;
    m.ops_tx_count = ops_tx_count;
    uint64_t per_vault = 0;
    for (const VaultRecord& v : home.vaults) {
        per_vault += Serialize(v.tx_wit).size() + Serialize(v.tx_fb).size() + 4 * 64;
    }
    m.stored_covenant_bytes = per_vault * (2 + watchtowers.size());
    return m;
}

// --- Adversary capability model ---

namespace {

bool IsSignerId(const std::string& id)
{
    return id == "home" || id == "office" || id == "bankA" || id == "bankB";
}

bool IsNetworked(const std::string& id)
{
    return id == "mobile" || id == "computer" || id == "provider" || id.rfind("wt", 0) == 0;
}

ChannelCapabilities FullRow()
{
    ChannelCapabilities c;
    c.caps = {Capability::Eavesdrop, Capability::Initiate, Capability::Block, Capability::Atomic,
              Capability::Crypto,    Capability::Fabricate, Capability::Spoof, Capability::Reorder};
    return c;
}

ChannelCapabilities CompromisedEndpointRow(bool include_eavesdrop)
{
    ChannelCapabilities c;
    c.caps = {Capability::Initiate, Capability::Block, Capability::Atomic, Capability::Crypto,
              Capability::Fabricate, Capability::Spoof, Capability::Reorder};
    if (include_eavesdrop) c.caps.insert(Capability::Eavesdrop);
    c.starred = {Capability::Initiate, Capability::Block, Capability::Fabricate,
                 Capability::Reorder};
    return c;
}

} // namespace

ChannelCapabilities CapabilitiesFor(const AjoloteWorld& world, const std::string& from,
                                    const std::string& to)
{
    auto compromised = [&](const std::string& id) -> bool {
        if (id == "computer") return world.computer_compromised;
        if (id == "mobile") return world.mobile.compromised;
        if (id == "home") return world.home.compromised;
        if (id == "office") return world.office.compromised;
        if (id == "bankA") return world.bank_a.compromised;
        if (id == "bankB") return world.bank_b.compromised;
        for (const WatchtowerState& wt : world.watchtowers) {
            if (wt.id == id) return wt.compromised;
        }
        return false;
    };
    std::string a = from, b = to;
    if (a == "user" || (b != "user" && IsSignerId(a) && IsNetworked(b))) std::swap(a, b);
    // After the swap: `a` is the device side for user channels, or the
    // networked side for device<->signer channels.

    if (b == "user") {
        if (a == "mobile" || a == "computer") {
            return compromised(a) ? CompromisedEndpointRow(true) : ChannelCapabilities{};
        }
        if (IsSignerId(a)) {
            return compromised(a) ? CompromisedEndpointRow(false) : ChannelCapabilities{};
        }
        return ChannelCapabilities{};
    }
    if (IsSignerId(b) && (a == "mobile" || a == "computer")) {
        bool net_comp = compromised(a);
        bool hw_comp = compromised(b);
        if (net_comp && hw_comp) return FullRow();
        if (net_comp) return CompromisedEndpointRow(true);
        if (hw_comp) return CompromisedEndpointRow(false);
        return ChannelCapabilities{};
    }
    if (IsNetworked(a) && IsNetworked(b)) return FullRow();
    // Signer<->signer channels do not exist; nothing is granted.
    return ChannelCapabilities{};
}

AdversaryDecision AdversaryAct(const AjoloteWorld& world, const std::string& from,
                               const std::string& to, Capability cap, bool protocol_typed)
{
    ChannelCapabilities row = CapabilitiesFor(world, from, to);
    if (!row.caps.count(cap)) {
        return {false, "capability not granted on this channel"};
    }
    if (row.starred.count(cap) && !protocol_typed) {
        return {false, "channel only accepts well-formed protocol messages"};
    }
    return {true, ""};
}

} // namespace covlab

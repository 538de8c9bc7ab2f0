// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_WORLD_H
#define COVLAB_AJOLOTE_WORLD_H

#include "ajolote/policies.h"
#include "ajolote/taptrees.h"
#include "chainsim/chain.h"
#include "crypto/keystore.h"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace covlab {

/** Per-vault artifact set held by the mobile and the home signer. */
struct VaultRecord {
    uint64_t vault_index{0}; // v
    Transaction tx_dep;
    Transaction tx_wit;
    Transaction tx_fb;
    Signature sig_wit_1{}, sig_wit_2{};
    Signature sig_fb_1{}, sig_fb_2{};
    GroupPoint e1, e2; // E^v_1, E^v_2
    uint32_t cursor_j{0};
    uint32_t account_i{1};
    KeyMap keys; // derived public keys snapshotted at deposit time

    Bytes32 DepTxid() const { return Txid(tx_dep); }
    Bytes32 WitTxid() const { return Txid(tx_wit); }
    uint64_t VaultAmount() const { return tx_dep.outputs[0].amount; }
};

/** Per-vault artifact set held by a watchtower (control block instead of
 *  account knowledge). */
struct WtVaultRecord {
    uint64_t vault_index{0};
    Transaction tx_dep;
    Transaction tx_wit;
    Transaction tx_fb;
    Signature sig_wit_1{}, sig_wit_2{};
    Signature sig_fb_1{}, sig_fb_2{};
    ControlBlock control_block; // c_k
    // Transport-level extras needed to act on the record.
    ScriptProgram fb_leaf_script;
    uint32_t cursor_j{0};
    uint32_t account_i{1};
    GroupPoint e1, e2;
    KeyMap keys;
    bool reject_pending{false}; // violation seen; fall-back not yet confirmed
};

/** A fall-back output the system can later sweep (created by TX_fb or by a
 *  recovery transaction). */
struct FbCoin {
    Outpoint outpoint;
    uint64_t amount{0};
    uint32_t cursor_j{0};
    uint32_t account_i{1};
    KeyMap keys;
};

struct ReceiveCoin {
    Outpoint outpoint;
    uint64_t amount{0};
    uint32_t cursor_h{0};
    uint32_t account_i{1};
    KeyMap keys;
};

struct SignerDevice {
    std::string id;        // mobile | home | office | bankA | bankB
    size_t signer_index{0}; // 1..5
    std::optional<ExtendedKey> master;
    uint32_t account_index{0}; // i; 0 = not initialized
    std::map<size_t, ExtendedKey> signer_accounts; // n -> A^i_n (public)
    std::vector<ExtendedKey> wt_accounts;          // W^i_k (public)
    std::vector<std::string> onion_ids;            // O_k
    std::optional<Scalar> noise_priv;
    std::optional<GroupPoint> noise_pub;
    std::optional<AjoloteConfig> config;
    uint32_t cursor_h{0}, cursor_j{0};
    std::vector<VaultRecord> vaults;   // mobile and home only
    std::vector<ReceiveCoin> receive_coins; // mobile wallet view
    bool compromised{false};
    bool decommissioned{false};

    ExtendedKey Account() const; // own account at account_index
    Scalar OutputPriv(KeyBranch branch, uint32_t cursor) const;
    Scalar OutputPrivAt(uint32_t account, KeyBranch branch, uint32_t cursor) const;
};

struct WatchtowerState {
    std::string id; // wt1..wtN
    size_t index{0}; // 1-based k
    size_t provider{0};
    std::optional<ExtendedKey> master; // w_k
    uint32_t account_index{1};
    std::string onion;
    std::optional<GroupPoint> user_noise; // P^Noise
    uint32_t timelock{0};
    WithdrawalConstraints constraints;
    std::vector<WtVaultRecord> vaults;
    std::vector<std::pair<uint64_t, uint64_t>> observed_withdrawals; // (height, amount)
    std::vector<std::string> alerts;
    bool compromised{false};
    bool online{true};

    ExtendedKey Account() const;
    Scalar ResponsePriv(uint32_t cursor) const; // w^{i,j}_k
};

/** Abstracted watchtower service provider: stores what the user registered. */
struct ProviderState {
    uint32_t timelock{0};
    WithdrawalConstraints constraints;
    std::optional<GroupPoint> user_noise;
    std::vector<size_t> watchtower_indices;
};

struct UserCheckpoint {
    std::string label;
    bool matched{true};
    std::string left, right;
};

/** Simulated user: perfectly reliable at matching displayed strings, aborts
 *  the ceremony on any mismatch. */
struct UserModel {
    AjoloteConfig intended;
    bool aborted{false};
    std::string abort_reason;
    std::vector<UserCheckpoint> checkpoints;

    bool Compare(const std::string& label, const std::string& a, const std::string& b);
};

struct CeremonyLogEntry {
    std::string ceremony;
    std::string event;
    std::string detail;
};

/** Single-datum tamper within the capability model, applied during setup or
 *  recovery message flows. */
struct TamperPlan {
    enum class Datum {
        SignerAccount,   // an A^1_n forwarded by the mobile
        WtAccount,       // a W^1_k on the mobile and/or computer path
        OnionId,         // an O_k
        OmitOnion,       // drop one O_k from the mobile's message
        NoiseToProvider, // P^Noise registered with the provider
        ConfigT,         // T as stored/displayed by the mobile
        ConstraintW,     // w as registered with the provider
    };
    Datum datum{Datum::WtAccount};
    bool via_mobile{false};
    bool via_computer{false};
    size_t index{0}; // element index where applicable
    // Attacker material generated when the plan is applied.
    std::optional<KeyPair> attacker_key;
    bool applied{false};
};

class AjoloteWorld
{
public:
    explicit AjoloteWorld(uint64_t seed, AjoloteConfig cfg, ChainConfig chain_cfg = {});

    ChainState chain;
    SignerDevice mobile, home, office, bank_a, bank_b;
    bool computer_compromised{false};
    std::vector<WatchtowerState> watchtowers;
    std::vector<ProviderState> providers;
    UserModel user;
    uint64_t next_vault_index{0};
    DeletionMethod deletion_method{DeletionMethod::Destroy};
    std::vector<CeremonyLogEntry> log;
    std::optional<TamperPlan> tamper;
    std::map<std::string, DeletionRecord> deletion_records; // "v<k>/e1" etc.
    bool per_vault_internal_keys{false};

    uint64_t seed() const { return m_seed; }
    Bytes32 SeedHash(const std::string& label, uint64_t a = 0, uint64_t b = 0) const;

    std::vector<SignerDevice*> Signers(); // all five, mobile first
    SignerDevice* SignerByIndex(size_t n);
    SignerDevice* DeviceById(const std::string& id);

    void Log(const std::string& ceremony, const std::string& event, const std::string& detail = "");

    // Policies at the given cursors built from a device's account knowledge.
    AjolotePolicies PoliciesFromDevice(const SignerDevice& device, uint32_t cursor_h,
                                       uint32_t cursor_j, const std::optional<GroupPoint>& e1,
                                       const std::optional<GroupPoint>& e2) const;

    Bytes32 SetupHash(const SignerDevice& device) const; // H_setup
    Bytes32 OperationHash(const std::vector<VaultRecord>& vaults) const; // H_operation
    Bytes32 OperationHashWt(const std::vector<WtVaultRecord>& vaults) const;

    // Advances watchtower monitoring and pending-deposit handshakes over the
    // blocks mined since the last call. The adversary acts before defenders
    // within each tick.
    void ProcessBlocks();
    void MineBlocks(size_t n);

    // UTXO classification for state dynamics and exposure metrics.
    struct Tallies {
        uint64_t receive_count{0}, vault_count{0}, unvault_count{0}, fallback_count{0};
        uint64_t receive_value{0}, vault_value{0}, unvault_value{0}, fallback_value{0};
    };
    Tallies Classify() const;

    struct VarMetrics {
        uint64_t tier1_exposure{0};
        uint64_t unlocked_tier2_exposure{0};
        uint64_t ops_tx_count{0};
        uint64_t stored_covenant_bytes{0};
    };
    VarMetrics ValueAtRisk() const;

    // Known output scripts by classification (kept as outputs are created).
    std::map<Bytes, AjoloteOutputType> known_scripts;
    uint64_t ops_tx_count{0};
    std::vector<FbCoin> fb_coins;
    std::vector<std::pair<uint64_t, Bytes32>> pending_deposit_acks; // (vault, dep txid)

    uint64_t last_processed_height{0};

private:
    uint64_t m_seed;
};

// --- Adversary capability model ---

enum class Capability { Eavesdrop, Initiate, Block, Atomic, Crypto, Fabricate, Spoof, Reorder };

struct ChannelCapabilities {
    std::set<Capability> caps;
    std::set<Capability> starred; // restricted to well-formed protocol messages

    bool Permits(Capability c, bool protocol_typed) const
    {
        if (!caps.count(c)) return false;
        if (starred.count(c) && !protocol_typed) return false;
        return true;
    }
};

// Capability row for the channel between two endpoints ("user", "mobile",
// "computer", signer ids, watchtower ids, "provider").
ChannelCapabilities CapabilitiesFor(const AjoloteWorld& world, const std::string& from,
                                    const std::string& to);

struct AdversaryDecision {
    bool permitted{false};
    std::string reason;
};

AdversaryDecision AdversaryAct(const AjoloteWorld& world, const std::string& from,
                               const std::string& to, Capability cap, bool protocol_typed);

} // namespace covlab

#endif // COVLAB_AJOLOTE_WORLD_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_CEREMONIES_H
#define COVLAB_AJOLOTE_CEREMONIES_H

#include "ajolote/world.h"
#include "script/satisfier.h"

namespace covlab {

enum class CeremonyKind {
    SetupMobile,
    SetupWatchtowers,
    SetupSigners,
    SetupFinalize,
    SetupTest,
    Receive,
    VaultDeposit,
    Withdraw,
    Spend,
    Reject,
    HealthCheck,
    FallbackV1,
    FallbackV2,
    FallbackV3,
    RotateAccounts,
    NewMobile,
    WtReinit,
    NewSigners,
    SendNewFallback,
    ReestablishTier2,
};

std::string CeremonyName(CeremonyKind k);
std::optional<CeremonyKind> CeremonyFromName(const std::string& name);

struct CeremonyOutcome {
    bool ok{false};
    std::string abort_reason;
    std::string detail;

    static CeremonyOutcome Ok(std::string detail = "") { return {true, "", std::move(detail)}; }
    static CeremonyOutcome Abort(std::string reason) { return {false, std::move(reason), ""}; }
};

// --- shared signing helpers ---

// Oracle resolving R/V/U/F key names to the participating devices at the
// given cursors (and account), W names to watchtowers, and E names to stored
// signature elements. Missing owners yield nullopt; a device whose derived
// key does not match the descriptor (`expected`) declines the slot rather
// than producing an unusable signature.
SignatureOracle DeviceOracle(const std::vector<const SignerDevice*>& devices,
                             const std::vector<const WatchtowerState*>& wts, uint32_t account_i,
                             uint32_t cursor_h, uint32_t cursor_j,
                             std::map<std::string, Bytes> stored_elements, const Transaction& tx,
                             size_t input_index, const PrevoutView& view,
                             const KeyMap& expected = {});

// Builds the full script-path witness for one leaf of a built tree.
WitnessStack LeafWitness(const BuiltTree& bt, size_t leaf_index, const AjolotePolicies& pol,
                         const SignatureOracle& oracle, uint32_t confirmed_age);

// Witness sized like the real one but with zeroed signatures, for fee
// measurement before amounts are final.
WitnessStack PlaceholderWitness(const BuiltTree& bt, size_t leaf_index, const AjolotePolicies& pol,
                                uint32_t confirmed_age);

constexpr uint64_t COVENANT_FEERATE = 40; // sat per serialized byte

// --- setup ---

CeremonyOutcome SetupMobile(AjoloteWorld& world);
CeremonyOutcome SetupWatchtowers(AjoloteWorld& world);
CeremonyOutcome SetupSigners(AjoloteWorld& world);
CeremonyOutcome SetupFinalize(AjoloteWorld& world);
CeremonyOutcome SetupTest(AjoloteWorld& world);
CeremonyOutcome RunFullSetup(AjoloteWorld& world);

// --- operation ---

CeremonyOutcome Receive(AjoloteWorld& world, uint64_t amount);
CeremonyOutcome VaultDeposit(AjoloteWorld& world, uint64_t amount);
// Largest amount a deposit of the full receive balance can carry once the
// deposit fee is paid (no change output).
uint64_t FullDepositAmount(AjoloteWorld& world);
CeremonyOutcome Withdraw(AjoloteWorld& world, uint64_t vault_index,
                         const std::string& second_device = "home");
CeremonyOutcome Spend(AjoloteWorld& world, uint64_t vault_index, uint64_t amount);
// Largest amount a spend of the whole unvault output can carry (no change).
uint64_t FullSpendAmount(AjoloteWorld& world, uint64_t vault_index);
CeremonyOutcome ManualReject(AjoloteWorld& world, uint64_t vault_index);
CeremonyOutcome HealthCheck(AjoloteWorld& world);

} // namespace covlab

#endif // COVLAB_AJOLOTE_CEREMONIES_H

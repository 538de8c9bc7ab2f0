// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_RECOVERY_H
#define COVLAB_AJOLOTE_RECOVERY_H

#include "ajolote/ceremonies.h"

namespace covlab {

// Broadcasts the complete covenant set. V1 runs from the mobile with any
// remaining signer; V2 from the home signer plus another signer through an
// emergency coordinator; V3 without mobile and home, pulling the covenant set
// from the first honest online watchtower.
CeremonyOutcome FallbackV1(AjoloteWorld& world);
CeremonyOutcome FallbackV2(AjoloteWorld& world);
CeremonyOutcome FallbackV3(AjoloteWorld& world);

// Rotates all non-decommissioned signers to account `i`; the user verifies
// the rotation index and the decommission selection on every display.
CeremonyOutcome RotateAccounts(AjoloteWorld& world, uint32_t new_account_index,
                               const std::set<std::string>& decommissioned);

// Replacement mobile bootstrapped from the home signer's setup state.
CeremonyOutcome NewMobile(AjoloteWorld& world);

// Watchtowers rotate accounts and onion services; the covenant history and
// new accounts come back signed with the previous account keys.
CeremonyOutcome WtReinit(AjoloteWorld& world);

// Replacement hardware signer (by device id) with fresh keys at the current
// account index.
CeremonyOutcome NewSigners(AjoloteWorld& world, const std::string& device_id);

// Sweeps every available fall-back and receive output into a single output
// under the new fall-back policy, built deterministically (lexicographic
// input order, 40 sat/B).
CeremonyOutcome SendNewFallback(AjoloteWorld& world);

// Moves `amount` from the new fall-back output to a fresh receive output,
// returning the rest as fall-back change.
CeremonyOutcome ReestablishTier2(AjoloteWorld& world, uint64_t amount);

} // namespace covlab

#endif // COVLAB_AJOLOTE_RECOVERY_H

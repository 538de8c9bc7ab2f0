// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_AJOLOTE_WATCHTOWER_H
#define COVLAB_AJOLOTE_WATCHTOWER_H

#include "ajolote/world.h"

namespace covlab {

enum class WtAction { None, BroadcastFallback, Alert };

// One watchtower's reaction to a confirmed transaction: evaluate the
// withdrawal constraints over the trailing window; on violation sign the
// stored fall-back transaction with the response key and broadcast it before
// the lock expires. A withdrawal shape for an unregistered vault raises an
// alert only.
WtAction WtStep(AjoloteWorld& world, WatchtowerState& wt, const Transaction& tx, uint64_t height);

// Scans blocks mined since the world's last processed height through every
// online watchtower, and completes pending deposit acknowledgements.
void WatchtowerTick(AjoloteWorld& world);

// Signs and broadcasts the stored fall-back transaction for a vault record.
SubmitResult BroadcastFallback(AjoloteWorld& world, WatchtowerState& wt, WtVaultRecord& record);

// True when the witness reveals the four-key withdrawal leaf shape.
bool LooksLikeWithdrawalLeaf(const ScriptProgram& script);

} // namespace covlab

#endif // COVLAB_AJOLOTE_WATCHTOWER_H

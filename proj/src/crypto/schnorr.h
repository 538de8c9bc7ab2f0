// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_SCHNORR_H
#define COVLAB_CRYPTO_SCHNORR_H

#include "crypto/bytes.h"
#include "crypto/ec.h"

#include <array>

namespace covlab {

using Signature = std::array<uint8_t, 64>; // R.x || s

struct KeyPair {
    Scalar priv;
    GroupPoint pub;
};

// Deterministic keypair from 32 bytes of entropy; throws InvalidSeed if the
// seed reduces to zero.
KeyPair KeypairGen(const Bytes32& seed);

// Schnorr-shaped signature over a 32-byte digest. Deterministic nonce derived
// from (priv, msg).
Signature Sign(const Scalar& priv, const Bytes32& msg);

bool Verify(const GroupPoint& pub, const Bytes32& msg, const Signature& sig);

} // namespace covlab

#endif // COVLAB_CRYPTO_SCHNORR_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "crypto/schnorr.h"

#include "crypto/hash.h"

#include <cstring>

namespace covlab {

namespace {

Scalar ChallengeScalar(const Bytes32& rx, const GroupPoint& pub, const Bytes32& msg)
{
    Bytes32 e = TaggedHashWriter("covlab/challenge")
                    .Write(rx)
                    .Write(pub.ToBytes())
                    .Write(msg)
                    .Finalize();
    return Scalar::FromBytes(e);
}

} // namespace

KeyPair KeypairGen(const Bytes32& seed)
{
    Scalar priv = Scalar::FromBytes(seed);
    if (priv.IsZero()) throw InvalidSeed();
    return KeyPair{priv, GroupPoint::MulGen(priv)};
}

Signature Sign(const Scalar& priv, const Bytes32& msg)
{
    Bytes32 nonce_seed = TaggedHashWriter("covlab/nonce")
                             .Write(priv.ToBytes())
                             .Write(msg)
                             .Finalize();
    Scalar k = Scalar::FromBytes(nonce_seed);
    if (k.IsZero()) k = Scalar::FromUint(1);
    GroupPoint r = GroupPoint::MulGen(k);
    if (!r.YIsEven()) k = k.Negate();
    r = GroupPoint::MulGen(k);
    Bytes32 rx = r.XBytes();
    GroupPoint pub = GroupPoint::MulGen(priv);
    Scalar e = ChallengeScalar(rx, pub, msg);
    Scalar s = k.Add(e.Mul(priv));
    Signature sig;
    std::memcpy(sig.data(), rx.data(), 32);
    Bytes32 sb = s.ToBytes();
    std::memcpy(sig.data() + 32, sb.data(), 32);
    return sig;
}

bool Verify(const GroupPoint& pub, const Bytes32& msg, const Signature& sig)
{
    if (pub.IsIdentity()) return false;
    Bytes32 rx, sb;
    std::memcpy(rx.data(), sig.data(), 32);
    std::memcpy(sb.data(), sig.data() + 32, 32);
    Scalar s = Scalar::FromBytes(sb);
    Scalar e = ChallengeScalar(rx, pub, msg);
    // R' = s*G - e*P; valid iff R' has even y and matches R.x.
    GroupPoint rp = GroupPoint::DoubleMulGen(s, e.Negate(), pub);
    if (rp.IsIdentity()) return false;
    if (!rp.YIsEven()) return false;
    return rp.XBytes() == rx;
}

} // namespace covlab

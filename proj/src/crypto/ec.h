// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_EC_H
#define COVLAB_CRYPTO_EC_H

#include "crypto/bytes.h"

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace covlab {

class InvalidSeed : public std::runtime_error
{
public:
    InvalidSeed() : std::runtime_error("seed reduces to the zero scalar") {}
};

class InvalidTweak : public std::runtime_error
{
public:
    InvalidTweak() : std::runtime_error("tweak result is the group identity") {}
};

/** Integer modulo the secp256k1 group order. */
class Scalar
{
public:
    Scalar() : m_w{0, 0, 0, 0} {}

    // Big-endian 32 bytes, reduced modulo the order.
    static Scalar FromBytes(const Bytes32& b);
    static Scalar FromUint(uint64_t v);

    Bytes32 ToBytes() const;

    bool IsZero() const { return (m_w[0] | m_w[1] | m_w[2] | m_w[3]) == 0; }

    Scalar Add(const Scalar& o) const;
    Scalar Sub(const Scalar& o) const;
    Scalar Mul(const Scalar& o) const;
    Scalar Negate() const;

    bool operator==(const Scalar& o) const
    {
        return m_w[0] == o.m_w[0] && m_w[1] == o.m_w[1] && m_w[2] == o.m_w[2] && m_w[3] == o.m_w[3];
    }

    // Bit i of the little-endian limb representation (i in [0, 255]).
    bool Bit(int i) const { return (m_w[i / 64] >> (i % 64)) & 1; }

private:
    friend class GroupPoint;
    uint64_t m_w[4]; // little-endian limbs
};

/** Element of the secp256k1 prime-order group; the identity is representable
 *  but is never a valid public key. */
class GroupPoint
{
public:
    GroupPoint() : m_infinity(true), m_x{0, 0, 0, 0}, m_y{0, 0, 0, 0} {}

    static const GroupPoint& Generator();

    // 33-byte compressed encoding (0x02/0x03 || x). Returns nullopt for
    // malformed encodings or x not on the curve.
    static std::optional<GroupPoint> FromBytes(const Bytes& ser);

    // Point with the given x coordinate and even y, if one exists.
    static std::optional<GroupPoint> LiftX(const Bytes32& x);

    // k*G via a fixed-window precomputed table.
    static GroupPoint MulGen(const Scalar& k);

    // a*G + b*P, normalized once.
    static GroupPoint DoubleMulGen(const Scalar& a, const Scalar& b, const GroupPoint& p);

    Bytes ToBytes() const;       // 33-byte compressed; identity -> 33 zero bytes
    Bytes32 XBytes() const;      // big-endian x coordinate
    bool YIsEven() const;

    bool IsIdentity() const { return m_infinity; }

    GroupPoint Add(const GroupPoint& o) const;
    GroupPoint Mul(const Scalar& k) const;
    GroupPoint Negate() const;

    bool operator==(const GroupPoint& o) const;
    bool operator!=(const GroupPoint& o) const { return !(*this == o); }

    // 65-byte uncompressed encoding (0x04 || x || y); used for the
    // nothing-up-my-sleeve internal key derivation.
    Bytes ToBytesUncompressed() const;

private:
    bool m_infinity;
    uint64_t m_x[4];
    uint64_t m_y[4];
};

// Q = P + t*G; the secret counterpart maps k to k + t. Throws InvalidTweak
// if the result is the identity.
GroupPoint TweakKey(const GroupPoint& p, const Scalar& t);

} // namespace covlab

#endif // COVLAB_CRYPTO_EC_H

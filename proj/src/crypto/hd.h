// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_HD_H
#define COVLAB_CRYPTO_HD_H

#include "crypto/ec.h"
#include "crypto/schnorr.h"

#include <stdexcept>

namespace covlab {

class HardenedFromPublic : public std::runtime_error
{
public:
    HardenedFromPublic() : std::runtime_error("hardened derivation requires the private key") {}
};

/** Hierarchical key with a chaincode. A private-extended key can derive both
 *  private and public children; a public-extended key can derive only
 *  non-hardened public children. */
class ExtendedKey
{
public:
    enum class Kind { PrivateExtended, PublicExtended };

    ExtendedKey() = default; // empty placeholder; not a usable key

    static ExtendedKey Master(const Bytes32& seed);

    Kind kind() const { return m_kind; }
    uint32_t depth() const { return m_depth; }
    const Bytes32& chaincode() const { return m_chaincode; }

    const Scalar& PrivateKey() const;
    const GroupPoint& PublicKey() const { return m_pub; }

    ExtendedKey ToPublic() const;

    // Non-hardened derivation commutes with ToPublic; hardened derivation
    // mixes in the parent private key and is rejected for public-extended
    // parents.
    ExtendedKey DeriveChild(uint32_t index, bool hardened) const;

private:
    Kind m_kind{Kind::PublicExtended};
    Scalar m_priv;
    GroupPoint m_pub;
    Bytes32 m_chaincode{};
    uint32_t m_depth{0};
};

} // namespace covlab

#endif // COVLAB_CRYPTO_HD_H

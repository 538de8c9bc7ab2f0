// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "crypto/hd.h"

#include "crypto/hash.h"

namespace covlab {

ExtendedKey ExtendedKey::Master(const Bytes32& seed)
{
    Bytes32 key_material = TaggedHashWriter("covlab/master-key").Write(seed).Finalize();
    ExtendedKey k;
    k.m_kind = Kind::PrivateExtended;
    k.m_priv = Scalar::FromBytes(key_material);
    if (k.m_priv.IsZero()) throw InvalidSeed();
    k.m_pub = GroupPoint::MulGen(k.m_priv);
    k.m_chaincode = TaggedHashWriter("covlab/master-chaincode").Write(seed).Finalize();
    k.m_depth = 0;
    return k;
}

const Scalar& ExtendedKey::PrivateKey() const
{
    if (m_kind != Kind::PrivateExtended) throw std::logic_error("no private key material");
    return m_priv;
}

ExtendedKey ExtendedKey::ToPublic() const
{
    ExtendedKey k = *this;
    k.m_kind = Kind::PublicExtended;
    k.m_priv = Scalar();
    return k;
}

ExtendedKey ExtendedKey::DeriveChild(uint32_t index, bool hardened) const
{
    if (hardened && m_kind != Kind::PrivateExtended) throw HardenedFromPublic();

    TaggedHashWriter tweak_writer(hardened ? "covlab/derive-hardened" : "covlab/derive");
    TaggedHashWriter chain_writer(hardened ? "covlab/chaincode-hardened" : "covlab/chaincode");
    if (hardened) {
        tweak_writer.Write(m_priv.ToBytes());
        chain_writer.Write(m_priv.ToBytes());
    } else {
        tweak_writer.Write(m_pub.ToBytes());
        chain_writer.Write(m_pub.ToBytes());
    }
    tweak_writer.Write(m_chaincode).WriteU32(index);
    chain_writer.Write(m_chaincode).WriteU32(index);

    Scalar tweak = Scalar::FromBytes(tweak_writer.Finalize());

    ExtendedKey child;
    child.m_kind = m_kind;
    child.m_chaincode = chain_writer.Finalize();
    child.m_depth = m_depth + 1;
    if (m_kind == Kind::PrivateExtended) {
        child.m_priv = m_priv.Add(tweak);
        child.m_pub = GroupPoint::MulGen(child.m_priv);
    } else {
        child.m_pub = m_pub.Add(GroupPoint::MulGen(tweak));
    }
    return child;
}

} // namespace covlab

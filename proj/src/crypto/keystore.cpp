// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "crypto/keystore.h"

namespace covlab {

std::optional<Scalar> DeletionRecord::AttemptRecovery(AttackerLevel level) const
{
    AttackerLevel required;
    switch (m_method) {
    case DeletionMethod::Dispose: required = AttackerLevel::Low; break;
    case DeletionMethod::Clear: required = AttackerLevel::Medium; break;
    case DeletionMethod::Purge: required = AttackerLevel::High; break;
    case DeletionMethod::Destroy: return std::nullopt;
    default: return std::nullopt;
    }
    if (static_cast<int>(level) >= static_cast<int>(required)) return m_residual;
    return std::nullopt;
}

void Keystore::Put(const std::string& key_id, const Scalar& priv)
{
    m_keys[key_id] = priv;
}

bool Keystore::Has(const std::string& key_id) const
{
    return m_keys.count(key_id) > 0;
}

GroupPoint Keystore::PublicKey(const std::string& key_id) const
{
    auto it = m_keys.find(key_id);
    if (it == m_keys.end()) throw KeyNotFound(key_id);
    return GroupPoint::MulGen(it->second);
}

Signature Keystore::SignDigest(const std::string& key_id, const Bytes32& msg) const
{
    auto it = m_keys.find(key_id);
    if (it == m_keys.end()) throw KeyNotFound(key_id);
    return Sign(it->second, msg);
}

DeletionRecord Keystore::DeleteKey(const std::string& key_id, DeletionMethod method)
{
    auto it = m_keys.find(key_id);
    if (it == m_keys.end()) throw KeyNotFound(key_id);
    DeletionRecord record(key_id, method, it->second);
    m_keys.erase(it);
    return record;
}

} // namespace covlab

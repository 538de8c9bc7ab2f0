// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_KEYSTORE_H
#define COVLAB_CRYPTO_KEYSTORE_H

#include "crypto/schnorr.h"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace covlab {

class KeyNotFound : public std::runtime_error
{
public:
    explicit KeyNotFound(const std::string& id) : std::runtime_error("unknown key id: " + id) {}
};

enum class DeletionMethod { Dispose, Clear, Purge, Destroy };

enum class AttackerLevel { Low, Medium, High };

/** Outcome of deleting a key. The deleted scalar is retained internally so
 *  the simulator can model imperfect deletion; it is reachable only through
 *  AttemptRecovery. */
class DeletionRecord
{
public:
    DeletionRecord() = default; // destroyed nothing; never recoverable
    DeletionRecord(std::string key_id, DeletionMethod method, Scalar residual)
        : m_key_id(std::move(key_id)), m_method(method), m_residual(residual) {}

    const std::string& key_id() const { return m_key_id; }
    DeletionMethod method() const { return m_method; }

    // Recovery succeeds iff the attacker level meets the method's difficulty:
    // dispose -> Low, clear -> Medium, purge -> High, destroy -> never.
    std::optional<Scalar> AttemptRecovery(AttackerLevel level) const;

private:
    std::string m_key_id;
    DeletionMethod m_method{DeletionMethod::Destroy};
    Scalar m_residual;
};

/** Device-confined signing key store. After DeleteKey the store refuses to
 *  sign with that id. */
class Keystore
{
public:
    void Put(const std::string& key_id, const Scalar& priv);
    bool Has(const std::string& key_id) const;
    GroupPoint PublicKey(const std::string& key_id) const;
    Signature SignDigest(const std::string& key_id, const Bytes32& msg) const;
    DeletionRecord DeleteKey(const std::string& key_id, DeletionMethod method);

private:
    std::map<std::string, Scalar> m_keys;
};

} // namespace covlab

#endif // COVLAB_CRYPTO_KEYSTORE_H

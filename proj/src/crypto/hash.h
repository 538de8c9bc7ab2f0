// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_HASH_H
#define COVLAB_CRYPTO_HASH_H

#include "crypto/bytes.h"
#include "crypto/sha256.h"

#include <string>

namespace covlab {

// SHA256(SHA256(tag) || SHA256(tag) || data)
Bytes32 TaggedHash(const std::string& tag, const Bytes& data);

/** Incremental writer for a tagged hash; the tag digest is written twice up
 *  front so tags act as domain separators. */
class TaggedHashWriter
{
public:
    explicit TaggedHashWriter(const std::string& tag);
    TaggedHashWriter& Write(const Bytes& data)
    {
        m_hasher.Write(data);
        return *this;
    }
    TaggedHashWriter& Write(const Bytes32& data)
    {
        m_hasher.Write(data);
        return *this;
    }
    TaggedHashWriter& WriteU8(uint8_t v)
    {
        m_hasher.Write(&v, 1);
        return *this;
    }
    TaggedHashWriter& WriteU32(uint32_t v);
    TaggedHashWriter& WriteU64(uint64_t v);
    Bytes32 Finalize() { return m_hasher.Finalize(); }

private:
    SHA256 m_hasher;
};

} // namespace covlab

#endif // COVLAB_CRYPTO_HASH_H

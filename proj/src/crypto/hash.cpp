// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "crypto/hash.h"

namespace covlab {

Bytes32 TaggedHash(const std::string& tag, const Bytes& data)
{
    return TaggedHashWriter(tag).Write(data).Finalize();
}

TaggedHashWriter::TaggedHashWriter(const std::string& tag)
{
    Bytes tag_bytes(tag.begin(), tag.end());
    Bytes32 tag_hash = Sha256(tag_bytes);
    m_hasher.Write(tag_hash);
    m_hasher.Write(tag_hash);
}

TaggedHashWriter& TaggedHashWriter::WriteU32(uint32_t v)
{
    uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    m_hasher.Write(b, 4);
    return *this;
}

TaggedHashWriter& TaggedHashWriter::WriteU64(uint64_t v)
{
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    m_hasher.Write(b, 8);
    return *this;
}

} // namespace covlab

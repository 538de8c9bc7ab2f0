// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_SHA256_H
#define COVLAB_CRYPTO_SHA256_H

#include "crypto/bytes.h"

#include <cstdint>
#include <cstdlib>

namespace covlab {

/** Incremental SHA256 hasher. */
class SHA256
{
public:
    SHA256();
    SHA256& Write(const uint8_t* data, size_t len);
    SHA256& Write(const Bytes& data) { return Write(data.data(), data.size()); }
    SHA256& Write(const Bytes32& data) { return Write(data.data(), data.size()); }
    void Finalize(uint8_t out[32]);
    Bytes32 Finalize();
    SHA256& Reset();

private:
    uint32_t m_s[8];
    uint8_t m_buf[64];
    uint64_t m_bytes;
};

Bytes32 Sha256(const Bytes& data);

} // namespace covlab

#endif // COVLAB_CRYPTO_SHA256_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_CRYPTO_BYTES_H
#define COVLAB_CRYPTO_BYTES_H

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace covlab {

using Bytes = std::vector<uint8_t>;
using Bytes32 = std::array<uint8_t, 32>;

inline void Append(Bytes& out, const uint8_t* data, size_t len)
{
    out.insert(out.end(), data, data + len);
}

inline void Append(Bytes& out, const Bytes& in) { Append(out, in.data(), in.size()); }

inline void Append(Bytes& out, const Bytes32& in) { Append(out, in.data(), in.size()); }

inline void AppendU8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void AppendU32(Bytes& out, uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void AppendU64(Bytes& out, uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

std::string HexStr(const uint8_t* data, size_t len);

inline std::string HexStr(const Bytes& b) { return HexStr(b.data(), b.size()); }
inline std::string HexStr(const Bytes32& b) { return HexStr(b.data(), b.size()); }

Bytes ParseHex(const std::string& hex);

} // namespace covlab

#endif // COVLAB_CRYPTO_BYTES_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "crypto/sha256.h"

#include <cstring>
#include <stdexcept>

namespace covlab {

namespace {

constexpr uint32_t K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2
};

inline uint32_t Rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }
inline uint32_t Ch(uint32_t x, uint32_t y, uint32_t z) { return z ^ (x & (y ^ z)); }
inline uint32_t Maj(uint32_t x, uint32_t y, uint32_t z) { return (x & y) | (z & (x | y)); }
inline uint32_t Sigma0(uint32_t x) { return Rotr(x, 2) ^ Rotr(x, 13) ^ Rotr(x, 22); }
inline uint32_t Sigma1(uint32_t x) { return Rotr(x, 6) ^ Rotr(x, 11) ^ Rotr(x, 25); }
inline uint32_t sigma0(uint32_t x) { return Rotr(x, 7) ^ Rotr(x, 18) ^ (x >> 3); }
inline uint32_t sigma1(uint32_t x) { return Rotr(x, 17) ^ Rotr(x, 19) ^ (x >> 10); }

void Transform(uint32_t* s, const uint8_t* chunk)
{
    uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
        w[i] = (uint32_t(chunk[i * 4]) << 24) | (uint32_t(chunk[i * 4 + 1]) << 16) |
               (uint32_t(chunk[i * 4 + 2]) << 8) | uint32_t(chunk[i * 4 + 3]);
    }
    for (int i = 16; i < 64; ++i) {
        w[i] = sigma1(w[i - 2]) + w[i - 7] + sigma0(w[i - 15]) + w[i - 16];
    }
    uint32_t a = s[0], b = s[1], c = s[2], d = s[3], e = s[4], f = s[5], g = s[6], h = s[7];
    for (int i = 0; i < 64; ++i) {
        uint32_t t1 = h + Sigma1(e) + Ch(e, f, g) + K[i] + w[i];
        uint32_t t2 = Sigma0(a) + Maj(a, b, c);
        h = g; g = f; f = e; e = d + t1;
        d = c; c = b; b = a; a = t1 + t2;
    }
    s[0] += a; s[1] += b; s[2] += c; s[3] += d;
    s[4] += e; s[5] += f; s[6] += g; s[7] += h;
}

} // namespace

SHA256::SHA256() { Reset(); }

SHA256& SHA256::Reset()
{
    m_s[0] = 0x6a09e667; m_s[1] = 0xbb67ae85; m_s[2] = 0x3c6ef372; m_s[3] = 0xa54ff53a;
    m_s[4] = 0x510e527f; m_s[5] = 0x9b05688c; m_s[6] = 0x1f83d9ab; m_s[7] = 0x5be0cd19;
    m_bytes = 0;
    return *this;
}

SHA256& SHA256::Write(const uint8_t* data, size_t len)
{
    size_t fill = m_bytes % 64;
    m_bytes += len;
    if (fill > 0) {
        size_t take = std::min<size_t>(64 - fill, len);
        std::memcpy(m_buf + fill, data, take);
        data += take;
        len -= take;
        if (fill + take == 64) Transform(m_s, m_buf);
        else return *this;
    }
    while (len >= 64) {
        Transform(m_s, data);
        data += 64;
        len -= 64;
    }
    if (len > 0) std::memcpy(m_buf, data, len);
    return *this;
}

void SHA256::Finalize(uint8_t out[32])
{
    uint64_t bits = m_bytes * 8;
    uint8_t pad[72];
    size_t fill = m_bytes % 64;
    size_t padlen = (fill < 56) ? (56 - fill) : (120 - fill);
    pad[0] = 0x80;
    std::memset(pad + 1, 0, padlen - 1);
    for (int i = 0; i < 8; ++i) pad[padlen + i] = static_cast<uint8_t>(bits >> (56 - 8 * i));
    Write(pad, padlen + 8);
    for (int i = 0; i < 8; ++i) {
        out[i * 4] = static_cast<uint8_t>(m_s[i] >> 24);
        out[i * 4 + 1] = static_cast<uint8_t>(m_s[i] >> 16);
        out[i * 4 + 2] = static_cast<uint8_t>(m_s[i] >> 8);
        out[i * 4 + 3] = static_cast<uint8_t>(m_s[i]);
    }
}

Bytes32 SHA256::Finalize()
{
    Bytes32 out;
    Finalize(out.data());
    return out;
}

Bytes32 Sha256(const Bytes& data)
{
    return SHA256().Write(data).Finalize();
}

std::string HexStr(const uint8_t* data, size_t len)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

Bytes ParseHex(const std::string& hex)
{
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include "crypto/hash.h"
#include "crypto/hd.h"
#include "crypto/keystore.h"
#include "crypto/schnorr.h"

#include <set>

using namespace covlab;

namespace {

Bytes32 SeedBytes(uint8_t fill)
{
    Bytes32 seed{};
    seed.fill(fill);
    return seed;
}

// Independent SHA256 reference used as the oracle for the tagged-hash tests.
// Deliberately separate from the production implementation.
namespace refsha {

uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

std::array<uint8_t, 32> Hash(const std::vector<uint8_t>& input)
{
    static const uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2};
    std::vector<uint8_t> msg = input;
    uint64_t bitlen = uint64_t(msg.size()) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56) msg.push_back(0);
    for (int i = 7; i >= 0; --i) msg.push_back(uint8_t(bitlen >> (8 * i)));
    uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                     0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    for (size_t off = 0; off < msg.size(); off += 64) {
        uint32_t w[64];
        for (int t = 0; t < 16; ++t) {
            w[t] = (uint32_t(msg[off + 4 * t]) << 24) | (uint32_t(msg[off + 4 * t + 1]) << 16) |
                   (uint32_t(msg[off + 4 * t + 2]) << 8) | uint32_t(msg[off + 4 * t + 3]);
        }
        for (int t = 16; t < 64; ++t) {
            uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
            uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16] + s0 + w[t - 7] + s1;
        }
        uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int t = 0; t < 64; ++t) {
            uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            uint32_t ch = (e & f) ^ (~e & g);
            uint32_t t1 = hh + s1 + ch + k[t] + w[t];
            uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            uint32_t t2 = s0 + maj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }
    std::array<uint8_t, 32> out;
    for (int i = 0; i < 8; ++i) {
        out[4 * i] = uint8_t(h[i] >> 24);
        out[4 * i + 1] = uint8_t(h[i] >> 16);
        out[4 * i + 2] = uint8_t(h[i] >> 8);
        out[4 * i + 3] = uint8_t(h[i]);
    }
    return out;
}

std::array<uint8_t, 32> TaggedHash(const std::string& tag, const std::vector<uint8_t>& data)
{
    std::vector<uint8_t> tag_bytes(tag.begin(), tag.end());
    auto th = Hash(tag_bytes);
    std::vector<uint8_t> msg;
    msg.reserve(64 + data.size());
    for (uint8_t b : th) msg.push_back(b);
    for (uint8_t b : th) msg.push_back(b);
    for (uint8_t b : data) msg.push_back(b);
    return Hash(msg);
}

} // namespace refsha

} // namespace

TEST_CASE("sha256 matches known vectors")
{
    CHECK(HexStr(Sha256({})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    Bytes abc{'a', 'b', 'c'};
    CHECK(HexStr(Sha256(abc)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Multi-block input exercises buffering.
    Bytes longmsg(1000, 'x');
    CHECK(Sha256(longmsg) == refsha::Hash(longmsg));
}

TEST_CASE("tagged hash equals SHA256(SHA256(tag)||SHA256(tag)||data)")
{
    Bytes data = ParseHex("00112233445566778899aabbccddeeff");
    CHECK(TaggedHash("TapTweak", data) == refsha::TaggedHash("TapTweak", data));
    CHECK(TaggedHash("TapTweak", data) == TaggedHash("TapTweak", data));
    // Distinct tags separate domains; expected values computed with the
    // reference implementation.
    CHECK(TaggedHash("A", data) == refsha::TaggedHash("A", data));
    CHECK(TaggedHash("B", data) == refsha::TaggedHash("B", data));
    CHECK(TaggedHash("A", data) != TaggedHash("B", data));
}

TEST_CASE("keypair generation is deterministic and rejects zero seeds")
{
    KeyPair a = KeypairGen(SeedBytes(1));
    KeyPair b = KeypairGen(SeedBytes(1));
    CHECK(a.priv == b.priv);
    CHECK(a.pub == b.pub);
    KeyPair c = KeypairGen(SeedBytes(2));
    CHECK(!(a.priv == c.priv));
    CHECK_THROWS_AS(KeypairGen(SeedBytes(0)), InvalidSeed);
    // pub == priv*G, and the encoding round-trips through the on-group check.
    CHECK(a.pub == GroupPoint::MulGen(a.priv));
    auto decoded = GroupPoint::FromBytes(a.pub.ToBytes());
    REQUIRE(decoded.has_value());
    CHECK(*decoded == a.pub);
}

TEST_CASE("signatures bind the message and the key")
{
    KeyPair kp = KeypairGen(SeedBytes(7));
    Bytes32 msg = TaggedHash("covlab/test-msg", {1, 2, 3});
    Signature sig = Sign(kp.priv, msg);
    CHECK(Verify(kp.pub, msg, sig));
    Bytes32 other = TaggedHash("covlab/test-msg", {1, 2, 4});
    CHECK(!Verify(kp.pub, other, sig));
    KeyPair kp2 = KeypairGen(SeedBytes(8));
    CHECK(!Verify(kp2.pub, msg, sig));
    Signature mangled = sig;
    mangled[10] ^= 1;
    CHECK(!Verify(kp.pub, msg, mangled));
}

TEST_CASE("tweaking a public key tracks the tweaked secret")
{
    KeyPair kp = KeypairGen(SeedBytes(9));
    // t = 0 is the additive identity.
    CHECK(TweakKey(kp.pub, Scalar()) == kp.pub);
    Scalar t = Scalar::FromBytes(TaggedHash("covlab/test-tweak", {5}));
    GroupPoint q = TweakKey(kp.pub, t);
    CHECK(q == GroupPoint::MulGen(kp.priv.Add(t)));
}

TEST_CASE("small-scalar multiplication agrees with repeated addition")
{
    // Oracle: k*G computed purely with the group addition law.
    const GroupPoint& g = GroupPoint::Generator();
    GroupPoint acc; // identity
    for (uint64_t k = 1; k <= 40; ++k) {
        acc = acc.Add(g);
        CHECK(acc == GroupPoint::MulGen(Scalar::FromUint(k)));
        CHECK(acc == g.Mul(Scalar::FromUint(k)));
    }
    // Random-vector check via the distributive law: (a+b)G == aG + bG.
    for (uint8_t i = 1; i < 12; ++i) {
        Scalar a = Scalar::FromBytes(TaggedHash("covlab/test-a", {i}));
        Scalar b = Scalar::FromBytes(TaggedHash("covlab/test-b", {i}));
        GroupPoint lhs = GroupPoint::MulGen(a.Add(b));
        GroupPoint rhs = GroupPoint::MulGen(a).Add(GroupPoint::MulGen(b));
        CHECK(lhs == rhs);
        CHECK(GroupPoint::MulGen(a) == g.Mul(a));
    }
}

TEST_CASE("non-hardened derivation commutes with taking the public part")
{
    // 100 random (parent, index) pairs across ten distinct parents.
    for (uint8_t p = 0; p < 10; ++p) {
        ExtendedKey master = ExtendedKey::Master(SeedBytes(11 + p));
        ExtendedKey parent = master.DeriveChild(p, true); // vary the parent
        ExtendedKey pub = parent.ToPublic();
        for (uint32_t i = 0; i < 10; ++i) {
            uint32_t index = (uint32_t(p) * 977 + i * 131) % 10000;
            ExtendedKey child_priv = parent.DeriveChild(index, false);
            ExtendedKey child_pub = pub.DeriveChild(index, false);
            CHECK(child_priv.PublicKey() == child_pub.PublicKey());
            CHECK(child_priv.chaincode() == child_pub.chaincode());
            CHECK(child_priv.depth() == parent.depth() + 1);
        }
    }
}

TEST_CASE("hardened derivation requires private material")
{
    ExtendedKey master = ExtendedKey::Master(SeedBytes(12));
    CHECK_NOTHROW(master.DeriveChild(3, true));
    CHECK_THROWS_AS(master.ToPublic().DeriveChild(3, true), HardenedFromPublic);
    // A hardened child's public key is not derivable from public data alone:
    // the non-hardened child at the same index is a different key.
    ExtendedKey hardened = master.DeriveChild(3, true);
    ExtendedKey normal = master.DeriveChild(3, false);
    CHECK(hardened.PublicKey() != normal.PublicKey());
}

TEST_CASE("account path yields pairwise distinct leaf keys")
{
    ExtendedKey master = ExtendedKey::Master(SeedBytes(13));
    ExtendedKey account = master.DeriveChild(1, true);
    std::set<std::string> seen;
    for (uint32_t j = 0; j < 4; ++j) {
        ExtendedKey leaf = account.DeriveChild(j, false);
        seen.insert(HexStr(leaf.PublicKey().ToBytes()));
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("deleted keys refuse to sign and recover per method difficulty")
{
    Bytes32 msg = TaggedHash("covlab/test-msg", {9});
    struct Row {
        DeletionMethod method;
        bool low, medium, high;
    };
    const Row rows[] = {
        {DeletionMethod::Dispose, true, true, true},
        {DeletionMethod::Clear, false, true, true},
        {DeletionMethod::Purge, false, false, true},
        {DeletionMethod::Destroy, false, false, false},
    };
    for (const Row& row : rows) {
        Keystore store;
        KeyPair kp = KeypairGen(SeedBytes(21));
        store.Put("k", kp.priv);
        CHECK(Verify(kp.pub, msg, store.SignDigest("k", msg)));
        DeletionRecord record = store.DeleteKey("k", row.method);
        CHECK_THROWS_AS(store.SignDigest("k", msg), KeyNotFound);
        auto low = record.AttemptRecovery(AttackerLevel::Low);
        auto medium = record.AttemptRecovery(AttackerLevel::Medium);
        auto high = record.AttemptRecovery(AttackerLevel::High);
        CHECK(low.has_value() == row.low);
        CHECK(medium.has_value() == row.medium);
        CHECK(high.has_value() == row.high);
        // Monotone in attacker level.
        CHECK((!low || medium));
        CHECK((!medium || high));
        if (high) CHECK(*high == kp.priv);
    }
    Keystore store;
    CHECK_THROWS_AS(store.DeleteKey("absent", DeletionMethod::Clear), KeyNotFound);
}

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "crypto/ec.h"

#include <cstring>

namespace covlab {

namespace {

using u128 = unsigned __int128;

// secp256k1 field prime p = 2^256 - 2^32 - 977 and group order n, as
// little-endian 64-bit limbs.
constexpr uint64_t P[4] = {0xFFFFFFFEFFFFFC2FULL, 0xFFFFFFFFFFFFFFFFULL,
                           0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL};
constexpr uint64_t N[4] = {0xBFD25E8CD0364141ULL, 0xBAAEDCE6AF48A03BULL,
                           0xFFFFFFFFFFFFFFFEULL, 0xFFFFFFFFFFFFFFFFULL};

int Cmp(const uint64_t a[4], const uint64_t b[4])
{
    for (int i = 3; i >= 0; --i) {
        if (a[i] < b[i]) return -1;
        if (a[i] > b[i]) return 1;
    }
    return 0;
}

bool IsZero4(const uint64_t a[4]) { return (a[0] | a[1] | a[2] | a[3]) == 0; }

// out = a + b, returns carry.
uint64_t Add4(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    u128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        u128 t = (u128)a[i] + b[i] + carry;
        out[i] = (uint64_t)t;
        carry = t >> 64;
    }
    return (uint64_t)carry;
}

// out = a - b, returns borrow.
uint64_t Sub4(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u128 t = (u128)a[i] - b[i] - borrow;
        out[i] = (uint64_t)t;
        borrow = (t >> 64) & 1;
    }
    return (uint64_t)borrow;
}

// out[8] = a * b (schoolbook).
void Mul4(uint64_t out[8], const uint64_t a[4], const uint64_t b[4])
{
    std::memset(out, 0, 8 * sizeof(uint64_t));
    for (int i = 0; i < 4; ++i) {
        u128 carry = 0;
        for (int j = 0; j < 4; ++j) {
            u128 t = (u128)a[i] * b[j] + out[i + j] + carry;
            out[i + j] = (uint64_t)t;
            carry = t >> 64;
        }
        out[i + 4] += (uint64_t)carry;
    }
}

// ---- Field arithmetic modulo p ----

void FieldReduceOnce(uint64_t a[4])
{
    if (Cmp(a, P) >= 0) Sub4(a, a, P);
}

void FieldAdd(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    uint64_t carry = Add4(out, a, b);
    if (carry || Cmp(out, P) >= 0) Sub4(out, out, P);
}

void FieldSub(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    uint64_t borrow = Sub4(out, a, b);
    if (borrow) Add4(out, out, P);
}

// Reduce a 512-bit value modulo p using 2^256 == 2^32 + 977 (mod p).
void FieldReduceWide(uint64_t out[4], const uint64_t t[8])
{
    // r = lo + hi * (2^32 + 977)
    constexpr uint64_t C = 0x1000003D1ULL; // 2^32 + 977
    uint64_t r[5];
    u128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        u128 v = (u128)t[i + 4] * C + t[i] + carry;
        r[i] = (uint64_t)v;
        carry = v >> 64;
    }
    r[4] = (uint64_t)carry;
    // Second pass: fold r[4] (at most ~2^33).
    u128 v = (u128)r[4] * C + r[0];
    out[0] = (uint64_t)v;
    u128 c2 = v >> 64;
    for (int i = 1; i < 4; ++i) {
        u128 s = (u128)r[i] + c2;
        out[i] = (uint64_t)s;
        c2 = s >> 64;
    }
    if (c2) {
        // Final fold: carry is 0 or 1.
        uint64_t one[4] = {C, 0, 0, 0};
        Add4(out, out, one);
    }
    FieldReduceOnce(out);
}

void FieldMul(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    uint64_t t[8];
    Mul4(t, a, b);
    FieldReduceWide(out, t);
}

void FieldSqr(uint64_t out[4], const uint64_t a[4]) { FieldMul(out, a, a); }

// Left-to-right binary exponentiation: a^e mod p.
void FieldPow(uint64_t out[4], const uint64_t a[4], const uint64_t e[4])
{
    uint64_t result[4] = {1, 0, 0, 0};
    uint64_t base[4];
    std::memcpy(base, a, sizeof(base));
    for (int i = 255; i >= 0; --i) {
        FieldSqr(result, result);
        if ((e[i / 64] >> (i % 64)) & 1) FieldMul(result, result, base);
    }
    std::memcpy(out, result, 4 * sizeof(uint64_t));
}

void FieldInv(uint64_t out[4], const uint64_t a[4])
{
    // Fermat: a^(p-2)
    uint64_t e[4];
    uint64_t two[4] = {2, 0, 0, 0};
    Sub4(e, P, two);
    FieldPow(out, a, e);
}

bool FieldSqrt(uint64_t out[4], const uint64_t a[4])
{
    // p % 4 == 3, so sqrt(a) = a^((p+1)/4) when a is a quadratic residue.
    uint64_t e[4];
    uint64_t one[4] = {1, 0, 0, 0};
    Add4(e, P, one); // p+1 fits since p < 2^256 - 1
    // shift right by 2
    for (int i = 0; i < 4; ++i) {
        e[i] >>= 2;
        if (i < 3) e[i] |= e[i + 1] << 62;
    }
    FieldPow(out, a, e);
    uint64_t chk[4];
    FieldSqr(chk, out);
    return Cmp(chk, a) == 0;
}

// ---- Scalar arithmetic modulo n ----

// Binary long-division reduction of a 512-bit value modulo n.
void ScalarReduceWide(uint64_t out[4], const uint64_t t[8])
{
    // rem accumulates the running remainder while scanning bits high to low.
    uint64_t rem[5] = {0, 0, 0, 0, 0};
    for (int bit = 511; bit >= 0; --bit) {
        for (int i = 4; i > 0; --i) rem[i] = (rem[i] << 1) | (rem[i - 1] >> 63);
        rem[0] <<= 1;
        rem[0] |= (t[bit / 64] >> (bit % 64)) & 1;
        // if rem >= n: rem -= n (rem fits in 257 bits here)
        bool ge = rem[4] != 0 || Cmp(rem, N) >= 0;
        if (ge) {
            uint64_t borrow = Sub4(rem, rem, N);
            rem[4] -= borrow;
        }
    }
    std::memcpy(out, rem, 4 * sizeof(uint64_t));
}

void ScalarAdd(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    uint64_t carry = Add4(out, a, b);
    if (carry || Cmp(out, N) >= 0) Sub4(out, out, N);
}

void ScalarSub(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    uint64_t borrow = Sub4(out, a, b);
    if (borrow) Add4(out, out, N);
}

void ScalarMul(uint64_t out[4], const uint64_t a[4], const uint64_t b[4])
{
    uint64_t t[8];
    Mul4(t, a, b);
    ScalarReduceWide(out, t);
}

void BytesToLimbs(uint64_t out[4], const Bytes32& b)
{
    for (int i = 0; i < 4; ++i) {
        uint64_t v = 0;
        for (int j = 0; j < 8; ++j) v = (v << 8) | b[(3 - i) * 8 + j];
        out[i] = v;
    }
}

Bytes32 LimbsToBytes(const uint64_t a[4])
{
    Bytes32 out;
    for (int i = 0; i < 4; ++i) {
        uint64_t v = a[3 - i];
        for (int j = 0; j < 8; ++j) out[i * 8 + j] = static_cast<uint8_t>(v >> (56 - 8 * j));
    }
    return out;
}

// ---- Jacobian point arithmetic (curve y^2 = x^3 + 7, a = 0) ----

struct Jac {
    uint64_t x[4], y[4], z[4];
    bool infinity;
};

const uint64_t CURVE_B[4] = {7, 0, 0, 0};

Jac JacInfinity()
{
    Jac j{};
    j.infinity = true;
    return j;
}

Jac FromAffine(const uint64_t x[4], const uint64_t y[4])
{
    Jac j;
    std::memcpy(j.x, x, 32);
    std::memcpy(j.y, y, 32);
    j.z[0] = 1; j.z[1] = j.z[2] = j.z[3] = 0;
    j.infinity = false;
    return j;
}

Jac JacDouble(const Jac& p)
{
    if (p.infinity || IsZero4(p.y)) return JacInfinity();
    uint64_t a[4], b[4], c[4], d[4], e[4], f[4], t[4], x3[4], y3[4], z3[4];
    FieldSqr(a, p.x);            // A = X^2
    FieldSqr(b, p.y);            // B = Y^2
    FieldSqr(c, b);              // C = B^2
    FieldAdd(t, p.x, b);         // X+B
    FieldSqr(t, t);              // (X+B)^2
    FieldSub(t, t, a);
    FieldSub(t, t, c);
    FieldAdd(d, t, t);           // D = 2((X+B)^2 - A - C)
    FieldAdd(e, a, a);
    FieldAdd(e, e, a);           // E = 3A
    FieldSqr(f, e);              // F = E^2
    FieldSub(x3, f, d);
    FieldSub(x3, x3, d);         // X3 = F - 2D
    FieldSub(t, d, x3);
    FieldMul(t, e, t);
    uint64_t c8[4];
    FieldAdd(c8, c, c);
    FieldAdd(c8, c8, c8);
    FieldAdd(c8, c8, c8);        // 8C
    FieldSub(y3, t, c8);         // Y3 = E(D - X3) - 8C
    FieldMul(z3, p.y, p.z);
    FieldAdd(z3, z3, z3);        // Z3 = 2YZ
    Jac r;
    std::memcpy(r.x, x3, 32);
    std::memcpy(r.y, y3, 32);
    std::memcpy(r.z, z3, 32);
    r.infinity = false;
    return r;
}

Jac JacAdd(const Jac& p, const Jac& q)
{
    if (p.infinity) return q;
    if (q.infinity) return p;
    uint64_t z1z1[4], z2z2[4], u1[4], u2[4], s1[4], s2[4], h[4], r[4];
    FieldSqr(z1z1, p.z);
    FieldSqr(z2z2, q.z);
    FieldMul(u1, p.x, z2z2);
    FieldMul(u2, q.x, z1z1);
    uint64_t t[4];
    FieldMul(t, q.z, z2z2);
    FieldMul(s1, p.y, t);
    FieldMul(t, p.z, z1z1);
    FieldMul(s2, q.y, t);
    FieldSub(h, u2, u1);
    FieldSub(r, s2, s1);
    if (IsZero4(h)) {
        if (IsZero4(r)) return JacDouble(p);
        return JacInfinity();
    }
    uint64_t h2[4], h3[4], u1h2[4], x3[4], y3[4], z3[4];
    FieldSqr(h2, h);
    FieldMul(h3, h2, h);
    FieldMul(u1h2, u1, h2);
    FieldSqr(x3, r);
    FieldSub(x3, x3, h3);
    FieldSub(x3, x3, u1h2);
    FieldSub(x3, x3, u1h2);      // X3 = R^2 - H^3 - 2*U1*H^2
    FieldSub(t, u1h2, x3);
    FieldMul(t, r, t);
    uint64_t s1h3[4];
    FieldMul(s1h3, s1, h3);
    FieldSub(y3, t, s1h3);       // Y3 = R(U1*H^2 - X3) - S1*H^3
    FieldMul(z3, p.z, q.z);
    FieldMul(z3, z3, h);         // Z3 = Z1*Z2*H
    Jac out;
    std::memcpy(out.x, x3, 32);
    std::memcpy(out.y, y3, 32);
    std::memcpy(out.z, z3, 32);
    out.infinity = false;
    return out;
}

void JacToAffine(const Jac& p, uint64_t outx[4], uint64_t outy[4], bool& infinity)
{
    if (p.infinity || IsZero4(p.z)) {
        infinity = true;
        std::memset(outx, 0, 32);
        std::memset(outy, 0, 32);
        return;
    }
    infinity = false;
    uint64_t zinv[4], zinv2[4], zinv3[4];
    FieldInv(zinv, p.z);
    FieldSqr(zinv2, zinv);
    FieldMul(zinv3, zinv2, zinv);
    FieldMul(outx, p.x, zinv2);
    FieldMul(outy, p.y, zinv3);
}

// Generator affine coordinates.
const uint64_t GX[4] = {0x59F2815B16F81798ULL, 0x029BFCDB2DCE28D9ULL,
                        0x55A06295CE870B07ULL, 0x79BE667EF9DCBBACULL};
const uint64_t GY[4] = {0x9C47D08FFB10D4B8ULL, 0xFD17B448A6855419ULL,
                        0x5DA4FBFC0E1108A8ULL, 0x483ADA7726A3C465ULL};

// Precomputed window table for generator multiplication:
// table[w][v-1] = v * 16^w * G in affine coordinates, 64 windows x 15 values.
struct GenTable {
    uint64_t x[64][15][4];
    uint64_t y[64][15][4];
    GenTable()
    {
        Jac base = FromAffine(GX, GY); // 16^0 * G
        for (int w = 0; w < 64; ++w) {
            Jac acc = JacInfinity();
            for (int v = 1; v <= 15; ++v) {
                acc = JacAdd(acc, base);
                bool inf;
                JacToAffine(acc, x[w][v - 1], y[w][v - 1], inf);
            }
            // base = 16 * base
            for (int i = 0; i < 4; ++i) base = JacDouble(base);
        }
    }
};

const GenTable& GetGenTable()
{
    static const GenTable table;
    return table;
}

} // namespace

// ---- Scalar ----

Scalar Scalar::FromBytes(const Bytes32& b)
{
    Scalar s;
    BytesToLimbs(s.m_w, b);
    if (Cmp(s.m_w, N) >= 0) Sub4(s.m_w, s.m_w, N);
    return s;
}

Scalar Scalar::FromUint(uint64_t v)
{
    Scalar s;
    s.m_w[0] = v;
    s.m_w[1] = s.m_w[2] = s.m_w[3] = 0;
    return s;
}

Bytes32 Scalar::ToBytes() const { return LimbsToBytes(m_w); }

Scalar Scalar::Add(const Scalar& o) const
{
    Scalar r;
    ScalarAdd(r.m_w, m_w, o.m_w);
    return r;
}

Scalar Scalar::Sub(const Scalar& o) const
{
    Scalar r;
    ScalarSub(r.m_w, m_w, o.m_w);
    return r;
}

Scalar Scalar::Mul(const Scalar& o) const
{
    Scalar r;
    ScalarMul(r.m_w, m_w, o.m_w);
    return r;
}

Scalar Scalar::Negate() const
{
    if (IsZero()) return *this;
    Scalar r;
    Sub4(r.m_w, N, m_w);
    return r;
}

// ---- GroupPoint ----

const GroupPoint& GroupPoint::Generator()
{
    static const GroupPoint g = [] {
        GroupPoint p;
        p.m_infinity = false;
        std::memcpy(p.m_x, GX, 32);
        std::memcpy(p.m_y, GY, 32);
        return p;
    }();
    return g;
}

std::optional<GroupPoint> GroupPoint::FromBytes(const Bytes& ser)
{
    if (ser.size() != 33) return std::nullopt;
    if (ser[0] != 0x02 && ser[0] != 0x03) return std::nullopt;
    Bytes32 xb;
    std::memcpy(xb.data(), ser.data() + 1, 32);
    uint64_t x[4];
    BytesToLimbs(x, xb);
    if (Cmp(x, P) >= 0) return std::nullopt;
    uint64_t rhs[4], y[4];
    FieldSqr(rhs, x);
    FieldMul(rhs, rhs, x);
    FieldAdd(rhs, rhs, CURVE_B);
    if (!FieldSqrt(y, rhs)) return std::nullopt;
    bool want_odd = ser[0] == 0x03;
    bool is_odd = y[0] & 1;
    if (want_odd != is_odd) FieldSub(y, P, y);
    GroupPoint p;
    p.m_infinity = false;
    std::memcpy(p.m_x, x, 32);
    std::memcpy(p.m_y, y, 32);
    return p;
}

std::optional<GroupPoint> GroupPoint::LiftX(const Bytes32& xb)
{
    Bytes ser(33, 0);
    ser[0] = 0x02;
    std::memcpy(ser.data() + 1, xb.data(), 32);
    return FromBytes(ser);
}

Bytes GroupPoint::ToBytes() const
{
    Bytes out(33, 0);
    if (m_infinity) return out;
    out[0] = (m_y[0] & 1) ? 0x03 : 0x02;
    Bytes32 xb = LimbsToBytes(m_x);
    std::memcpy(out.data() + 1, xb.data(), 32);
    return out;
}

Bytes GroupPoint::ToBytesUncompressed() const
{
    Bytes out(65, 0);
    if (m_infinity) return out;
    out[0] = 0x04;
    Bytes32 xb = LimbsToBytes(m_x);
    Bytes32 yb = LimbsToBytes(m_y);
    std::memcpy(out.data() + 1, xb.data(), 32);
    std::memcpy(out.data() + 33, yb.data(), 32);
    return out;
}

Bytes32 GroupPoint::XBytes() const { return LimbsToBytes(m_x); }

bool GroupPoint::YIsEven() const { return !(m_y[0] & 1); }

bool GroupPoint::operator==(const GroupPoint& o) const
{
    if (m_infinity || o.m_infinity) return m_infinity == o.m_infinity;
    return Cmp(m_x, o.m_x) == 0 && Cmp(m_y, o.m_y) == 0;
}

GroupPoint GroupPoint::Add(const GroupPoint& o) const
{
    if (m_infinity) return o;
    if (o.m_infinity) return *this;
    Jac a = FromAffine(m_x, m_y);
    Jac b = FromAffine(o.m_x, o.m_y);
    Jac s = JacAdd(a, b);
    GroupPoint r;
    JacToAffine(s, r.m_x, r.m_y, r.m_infinity);
    return r;
}

GroupPoint GroupPoint::Negate() const
{
    if (m_infinity) return *this;
    GroupPoint r = *this;
    FieldSub(r.m_y, P, r.m_y);
    return r;
}

GroupPoint GroupPoint::Mul(const Scalar& k) const
{
    if (m_infinity || k.IsZero()) return GroupPoint();
    Jac acc = JacInfinity();
    Jac base = FromAffine(m_x, m_y);
    for (int i = 255; i >= 0; --i) {
        acc = JacDouble(acc);
        if (k.Bit(i)) acc = JacAdd(acc, base);
    }
    GroupPoint r;
    JacToAffine(acc, r.m_x, r.m_y, r.m_infinity);
    return r;
}

GroupPoint GroupPoint::MulGen(const Scalar& k)
{
    if (k.IsZero()) return GroupPoint();
    const GenTable& table = GetGenTable();
    Jac acc = JacInfinity();
    for (int w = 0; w < 64; ++w) {
        unsigned v = (k.m_w[w / 16] >> ((w % 16) * 4)) & 0xF;
        if (v == 0) continue;
        Jac e = FromAffine(table.x[w][v - 1], table.y[w][v - 1]);
        acc = JacAdd(acc, e);
    }
    GroupPoint r;
    JacToAffine(acc, r.m_x, r.m_y, r.m_infinity);
    return r;
}

GroupPoint GroupPoint::DoubleMulGen(const Scalar& a, const Scalar& b, const GroupPoint& p)
{
    GroupPoint ag = MulGen(a);
    GroupPoint bp = p.Mul(b);
    return ag.Add(bp);
}

GroupPoint TweakKey(const GroupPoint& p, const Scalar& t)
{
    GroupPoint q = p.Add(GroupPoint::MulGen(t));
    if (q.IsIdentity()) throw InvalidTweak();
    return q;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_SCRIPT_COMPILER_H
#define COVLAB_SCRIPT_COMPILER_H

#include "crypto/bytes.h"
#include "crypto/ec.h"
#include "script/policy.h"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace covlab {

enum class Opcode : uint8_t {
    PushKey = 0x01,
    PushNum = 0x02,
    PushBytes = 0x03,
    CheckSig = 0x10,
    CheckSigVerify = 0x11,
    CheckSigAdd = 0x12,
    NumEqual = 0x13,
    NumEqualVerify = 0x14,
    CheckSequenceVerify = 0x15,
    CtvVerify = 0x20,
    Inspect = 0x21,
};

enum class InspectField : uint8_t {
    OutputCount = 0,
    OutputAmount = 1,
    OutputScript = 2,
    InputCount = 3,
    InputScript = 4,
    SumInputAmounts = 5,
    SumOutputAmounts = 6,
};

enum class Comparator : uint8_t { Eq = 0, Le = 1, Ge = 2 };

struct Instruction {
    Opcode op{Opcode::PushNum};
    GroupPoint key;                // PushKey
    int64_t num{0};                // PushNum / Inspect numeric target
    Bytes bytes;                   // PushBytes / CtvVerify hash / Inspect script target
    InspectField field{InspectField::OutputCount};
    Comparator cmp{Comparator::Eq};
    uint32_t index{0};             // Inspect per-index fields

    static Instruction MakePushKey(const GroupPoint& k);
    static Instruction MakePushNum(int64_t n);
    static Instruction Simple(Opcode op);
    static Instruction MakeCtv(const Bytes32& hash);
    static Instruction MakeInspectNum(InspectField f, Comparator c, int64_t target, uint32_t index = 0);
    static Instruction MakeInspectScript(InspectField f, Comparator c, Bytes target, uint32_t index = 0);

    bool operator==(const Instruction& o) const;
};

/** Loop-free instruction list; terminates on all inputs by construction. */
struct ScriptProgram {
    std::vector<Instruction> instructions;

    Bytes Serialize() const;
    static std::optional<ScriptProgram> Parse(const Bytes& data);
    std::string ToString() const;
    std::vector<GroupPoint> PushedKeys() const;

    bool operator==(const ScriptProgram& o) const { return Serialize() == o.Serialize(); }
};

constexpr size_t MAX_STACK_SIZE = 1000;

// Compiles the policy's satisfaction predicate to an instruction list.
// or(...) has no conditional encoding here; disjunction lives in the tree of
// alternative leaves.
ScriptProgram Compile(const Policy& policy, const KeyMap& keys);

} // namespace covlab

#endif // COVLAB_SCRIPT_COMPILER_H

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "script/compiler.h"

#include <algorithm>

namespace covlab {

Instruction Instruction::MakePushKey(const GroupPoint& k)
{
    Instruction i;
    i.op = Opcode::PushKey;
    i.key = k;
    return i;
}

Instruction Instruction::MakePushNum(int64_t n)
{
    Instruction i;
    i.op = Opcode::PushNum;
    i.num = n;
    return i;
}

Instruction Instruction::Simple(Opcode op)
{
    Instruction i;
    i.op = op;
    return i;
}

Instruction Instruction::MakeCtv(const Bytes32& hash)
{
    Instruction i;
    i.op = Opcode::CtvVerify;
    i.bytes.assign(hash.begin(), hash.end());
    return i;
}

Instruction Instruction::MakeInspectNum(InspectField f, Comparator c, int64_t target, uint32_t index)
{
    Instruction i;
    i.op = Opcode::Inspect;
    i.field = f;
    i.cmp = c;
    i.num = target;
    i.index = index;
    return i;
}

Instruction Instruction::MakeInspectScript(InspectField f, Comparator c, Bytes target, uint32_t index)
{
    Instruction i;
    i.op = Opcode::Inspect;
    i.field = f;
    i.cmp = c;
    i.bytes = std::move(target);
    i.index = index;
    return i;
}

bool Instruction::operator==(const Instruction& o) const
{
    return op == o.op && key == o.key && num == o.num && bytes == o.bytes && field == o.field &&
           cmp == o.cmp && index == o.index;
}

Bytes ScriptProgram::Serialize() const
{
    Bytes out;
    for (const Instruction& ins : instructions) {
        AppendU8(out, static_cast<uint8_t>(ins.op));
        switch (ins.op) {
        case Opcode::PushKey:
            Append(out, ins.key.ToBytes());
            break;
        case Opcode::PushNum:
            AppendU64(out, static_cast<uint64_t>(ins.num));
            break;
        case Opcode::PushBytes:
        case Opcode::CtvVerify:
            AppendU32(out, static_cast<uint32_t>(ins.bytes.size()));
            Append(out, ins.bytes);
            break;
        case Opcode::Inspect:
            AppendU8(out, static_cast<uint8_t>(ins.field));
            AppendU8(out, static_cast<uint8_t>(ins.cmp));
            AppendU32(out, ins.index);
            AppendU64(out, static_cast<uint64_t>(ins.num));
            AppendU32(out, static_cast<uint32_t>(ins.bytes.size()));
            Append(out, ins.bytes);
            break;
        default:
            break;
        }
    }
    return out;
}

std::optional<ScriptProgram> ScriptProgram::Parse(const Bytes& data)
{
    ScriptProgram prog;
    size_t pos = 0;
    auto need = [&](size_t n) { return pos + n <= data.size(); };
    auto u8 = [&]() { return data[pos++]; };
    auto u32 = [&]() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    };
    auto u64 = [&]() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    };
    while (pos < data.size()) {
        Instruction ins;
        ins.op = static_cast<Opcode>(u8());
        switch (ins.op) {
        case Opcode::PushKey: {
            if (!need(33)) return std::nullopt;
            auto key = GroupPoint::FromBytes(Bytes(data.begin() + pos, data.begin() + pos + 33));
            pos += 33;
            if (!key) return std::nullopt;
            ins.key = *key;
            break;
        }
        case Opcode::PushNum:
            if (!need(8)) return std::nullopt;
            ins.num = static_cast<int64_t>(u64());
            break;
        case Opcode::PushBytes:
        case Opcode::CtvVerify: {
            if (!need(4)) return std::nullopt;
            uint32_t len = u32();
            if (!need(len)) return std::nullopt;
            ins.bytes.assign(data.begin() + pos, data.begin() + pos + len);
            pos += len;
            break;
        }
        case Opcode::Inspect: {
            if (!need(1 + 1 + 4 + 8 + 4)) return std::nullopt;
            ins.field = static_cast<InspectField>(u8());
            ins.cmp = static_cast<Comparator>(u8());
            ins.index = u32();
            ins.num = static_cast<int64_t>(u64());
            uint32_t len = u32();
            if (!need(len)) return std::nullopt;
            ins.bytes.assign(data.begin() + pos, data.begin() + pos + len);
            pos += len;
            break;
        }
        case Opcode::CheckSig:
        case Opcode::CheckSigVerify:
        case Opcode::CheckSigAdd:
        case Opcode::NumEqual:
        case Opcode::NumEqualVerify:
        case Opcode::CheckSequenceVerify:
            break;
        default:
            return std::nullopt;
        }
        prog.instructions.push_back(std::move(ins));
    }
    return prog;
}

std::string ScriptProgram::ToString() const
{
    std::string out;
    for (const Instruction& ins : instructions) {
        if (!out.empty()) out += ' ';
        switch (ins.op) {
        case Opcode::PushKey: out += "<" + HexStr(ins.key.ToBytes()).substr(0, 8) + ">"; break;
        case Opcode::PushNum: out += std::to_string(ins.num); break;
        case Opcode::PushBytes: out += "<" + HexStr(ins.bytes) + ">"; break;
        case Opcode::CheckSig: out += "CHECKSIG"; break;
        case Opcode::CheckSigVerify: out += "CHECKSIGVERIFY"; break;
        case Opcode::CheckSigAdd: out += "CHECKSIGADD"; break;
        case Opcode::NumEqual: out += "NUMEQUAL"; break;
        case Opcode::NumEqualVerify: out += "NUMEQUALVERIFY"; break;
        case Opcode::CheckSequenceVerify: out += "CHECKSEQUENCEVERIFY"; break;
        case Opcode::CtvVerify: out += "CTV_VERIFY(" + HexStr(ins.bytes).substr(0, 8) + ")"; break;
        case Opcode::Inspect: out += "INSPECT"; break;
        }
    }
    return out;
}

std::vector<GroupPoint> ScriptProgram::PushedKeys() const
{
    std::vector<GroupPoint> out;
    for (const Instruction& ins : instructions) {
        if (ins.op == Opcode::PushKey) out.push_back(ins.key);
    }
    return out;
}

namespace {

const GroupPoint& ResolveKey(const std::string& name, const KeyMap& keys)
{
    auto it = keys.find(name);
    if (it == keys.end()) throw UnknownKey(name);
    return it->second;
}

// Conjunction fragments in program order. Time-lock fragments are moved to
// the end: CHECKSEQUENCEVERIFY leaves its operand on the stack, so a trailing
// lock doubles as the final truthy element and never sits between a pushed
// key and its signature.
void FlattenConjunction(const Policy& p, std::vector<const Policy*>& out)
{
    if (p.kind == Policy::Kind::And) {
        FlattenConjunction(p.children[0], out);
        FlattenConjunction(p.children[1], out);
        return;
    }
    out.push_back(&p);
}

// `final` selects CHECKSIG/NUMEQUAL for the last fragment of the program and
// the VERIFY forms elsewhere.
void CompileInto(const Policy& p, const KeyMap& keys, ScriptProgram& prog, bool final)
{
    switch (p.kind) {
    case Policy::Kind::Pk:
        prog.instructions.push_back(Instruction::MakePushKey(ResolveKey(p.key_name, keys)));
        prog.instructions.push_back(
            Instruction::Simple(final ? Opcode::CheckSig : Opcode::CheckSigVerify));
        return;
    case Policy::Kind::Older:
        prog.instructions.push_back(Instruction::MakePushNum(p.blocks));
        prog.instructions.push_back(Instruction::Simple(Opcode::CheckSequenceVerify));
        return;
    case Policy::Kind::And: {
        std::vector<const Policy*> fragments;
        FlattenConjunction(p, fragments);
        std::stable_partition(fragments.begin(), fragments.end(), [](const Policy* f) {
            return f->kind != Policy::Kind::Older;
        });
        for (size_t i = 0; i < fragments.size(); ++i) {
            bool last = i + 1 == fragments.size();
            CompileInto(*fragments[i], keys, prog, last && final);
        }
        return;
    }
    case Policy::Kind::Thresh: {
        if (p.threshold < 1 || p.threshold > p.children.size()) {
            throw MalformedPolicy("thresh bounds violated");
        }
        for (const Policy& c : p.children) {
            if (c.kind != Policy::Kind::Pk) {
                throw MalformedPolicy("thresh children must be pk() fragments");
            }
        }
        if (p.threshold == p.children.size()) {
            for (size_t i = 0; i < p.children.size(); ++i) {
                bool last = i + 1 == p.children.size();
                prog.instructions.push_back(
                    Instruction::MakePushKey(ResolveKey(p.children[i].key_name, keys)));
                prog.instructions.push_back(Instruction::Simple(
                    (last && final) ? Opcode::CheckSig : Opcode::CheckSigVerify));
            }
            return;
        }
        for (size_t i = 0; i < p.children.size(); ++i) {
            prog.instructions.push_back(
                Instruction::MakePushKey(ResolveKey(p.children[i].key_name, keys)));
            prog.instructions.push_back(
                Instruction::Simple(i == 0 ? Opcode::CheckSig : Opcode::CheckSigAdd));
        }
        prog.instructions.push_back(Instruction::MakePushNum(p.threshold));
        prog.instructions.push_back(
            Instruction::Simple(final ? Opcode::NumEqual : Opcode::NumEqualVerify));
        return;
    }
    case Policy::Kind::Or:
        throw MalformedPolicy("or() has no linear script form; use alternative tree leaves");
    }
}

} // namespace

ScriptProgram Compile(const Policy& policy, const KeyMap& keys)
{
    ScriptProgram prog;
    CompileInto(policy, keys, prog, true);
    return prog;
}

} // namespace covlab

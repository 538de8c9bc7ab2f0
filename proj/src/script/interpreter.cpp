// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "script/interpreter.h"

#include "crypto/hash.h"

#include <cstring>

namespace covlab {

namespace {

// Stack elements are raw byte strings. Numbers use minimal unsigned
// little-endian encoding; the empty string is zero/false.
Bytes EncodeNum(int64_t v)
{
    Bytes out;
    uint64_t u = static_cast<uint64_t>(v);
    while (u != 0) {
        out.push_back(static_cast<uint8_t>(u & 0xff));
        u >>= 8;
    }
    return out;
}

std::optional<int64_t> DecodeNum(const Bytes& b)
{
    if (b.size() > 8) return std::nullopt;
    uint64_t v = 0;
    for (size_t i = 0; i < b.size(); ++i) v |= uint64_t(b[i]) << (8 * i);
    return static_cast<int64_t>(v);
}

bool Truthy(const Bytes& b)
{
    for (uint8_t c : b) {
        if (c != 0) return true;
    }
    return false;
}

struct SigCheck {
    bool ok{false};
    bool malformed{false};
};

SigCheck CheckSignature(const Bytes& sig_elem, const GroupPoint& key, const ExecContext& ctx)
{
    SigCheck out;
    if (sig_elem.empty()) return out; // empty push: missing signature
    SighashFlag flag = SIGHASH_ALL;
    size_t sig_len = sig_elem.size();
    if (sig_len == 65) {
        flag = SighashFlag::FromByte(sig_elem[64]);
        if (flag.base != SighashBase::All && flag.base != SighashBase::Single &&
            flag.base != SighashBase::None) {
            out.malformed = true;
            return out;
        }
        sig_len = 64;
    } else if (sig_len != 64) {
        out.malformed = true;
        return out;
    }
    Signature sig;
    std::memcpy(sig.data(), sig_elem.data(), 64);
    Bytes32 digest;
    try {
        digest = ExecSignatureDigest(ctx, flag);
    } catch (const std::exception&) {
        out.malformed = true;
        return out;
    }
    out.ok = Verify(key, digest, sig);
    return out;
}

} // namespace

Bytes32 ExecSignatureDigest(const ExecContext& ctx, SighashFlag flag)
{
    if (ctx.tx) return SighashMsg(*ctx.tx, ctx.input_index, Semantics::Taproot, flag, ctx.prevouts);
    if (ctx.msg_digest) return *ctx.msg_digest;
    throw std::runtime_error("execution context provides no signature digest");
}

Bytes EncodeSigElement(const Signature& sig, SighashFlag flag)
{
    Bytes out(sig.begin(), sig.end());
    out.push_back(flag.ToByte());
    return out;
}

Bytes32 CtvTemplateHash(const Transaction& tx, uint32_t input_index)
{
    TaggedHashWriter w("covlab/ctv-template");
    w.WriteU32(tx.version);
    w.WriteU32(static_cast<uint32_t>(tx.inputs.size()));
    for (const TxInput& in : tx.inputs) w.WriteU32(in.sequence);
    w.WriteU32(static_cast<uint32_t>(tx.outputs.size()));
    for (const TxOutput& o : tx.outputs) {
        w.WriteU64(o.amount);
        w.WriteU32(static_cast<uint32_t>(o.script.size()));
        w.Write(o.script);
    }
    w.WriteU32(tx.locktime);
    w.WriteU32(input_index);
    return w.Finalize();
}

ExecResult Execute(const ScriptProgram& program, const Witness& witness, const ExecContext& ctx)
{
    std::vector<Bytes> stack = witness.elements;
    if (stack.size() > MAX_STACK_SIZE) return ExecResult::Reject(REJECT_STACK_OVERFLOW);

    auto pop = [&stack]() -> std::optional<Bytes> {
        if (stack.empty()) return std::nullopt;
        Bytes top = std::move(stack.back());
        stack.pop_back();
        return top;
    };

    for (const Instruction& ins : program.instructions) {
        switch (ins.op) {
        case Opcode::PushKey:
            stack.push_back(ins.key.ToBytes());
            break;
        case Opcode::PushNum:
            stack.push_back(EncodeNum(ins.num));
            break;
        case Opcode::PushBytes:
            stack.push_back(ins.bytes);
            break;
        case Opcode::CheckSig:
        case Opcode::CheckSigVerify: {
            auto key_bytes = pop();
            auto sig = pop();
            if (!key_bytes || !sig) return ExecResult::Reject(REJECT_STACK_UNDERFLOW);
            auto key = GroupPoint::FromBytes(*key_bytes);
            if (!key) return ExecResult::Reject(REJECT_MALFORMED);
            SigCheck check = CheckSignature(*sig, *key, ctx);
            if (check.malformed) return ExecResult::Reject(REJECT_BAD_SIGNATURE);
            if (ins.op == Opcode::CheckSigVerify) {
                if (!check.ok) return ExecResult::Reject(REJECT_BAD_SIGNATURE);
            } else {
                stack.push_back(check.ok ? EncodeNum(1) : Bytes{});
            }
            break;
        }
        case Opcode::CheckSigAdd: {
            auto key_bytes = pop();
            auto accum = pop();
            auto sig = pop();
            if (!key_bytes || !accum || !sig) return ExecResult::Reject(REJECT_STACK_UNDERFLOW);
            auto key = GroupPoint::FromBytes(*key_bytes);
            if (!key) return ExecResult::Reject(REJECT_MALFORMED);
            auto n = DecodeNum(*accum);
            if (!n) return ExecResult::Reject(REJECT_MALFORMED);
            SigCheck check = CheckSignature(*sig, *key, ctx);
            if (check.malformed) return ExecResult::Reject(REJECT_BAD_SIGNATURE);
            stack.push_back(EncodeNum(*n + (check.ok ? 1 : 0)));
            break;
        }
        case Opcode::NumEqual:
        case Opcode::NumEqualVerify: {
            auto b = pop();
            auto a = pop();
            if (!a || !b) return ExecResult::Reject(REJECT_STACK_UNDERFLOW);
            auto na = DecodeNum(*a);
            auto nb = DecodeNum(*b);
            if (!na || !nb) return ExecResult::Reject(REJECT_MALFORMED);
            if (ins.op == Opcode::NumEqualVerify) {
                if (*na != *nb) return ExecResult::Reject(REJECT_NUM_MISMATCH);
            } else {
                stack.push_back(*na == *nb ? EncodeNum(1) : Bytes{});
            }
            break;
        }
        case Opcode::CheckSequenceVerify: {
            if (stack.empty()) return ExecResult::Reject(REJECT_STACK_UNDERFLOW);
            auto n = DecodeNum(stack.back());
            if (!n || *n < 0) return ExecResult::Reject(REJECT_MALFORMED);
            if (static_cast<int64_t>(ctx.confirmed_age) < *n) {
                return ExecResult::Reject(REJECT_PREMATURE_LOCK);
            }
            break; // operand stays on the stack
        }
        case Opcode::CtvVerify: {
            if (!ctx.ctv_enabled) return ExecResult::Reject(REJECT_DISABLED_OPCODE);
            if (!ctx.tx) return ExecResult::Reject(REJECT_DISABLED_OPCODE);
            Bytes32 actual = CtvTemplateHash(*ctx.tx, static_cast<uint32_t>(ctx.input_index));
            if (ins.bytes.size() != 32 ||
                std::memcmp(actual.data(), ins.bytes.data(), 32) != 0) {
                return ExecResult::Reject(REJECT_CTV_MISMATCH);
            }
            stack.push_back(EncodeNum(1));
            break;
        }
        case Opcode::Inspect: {
            if (!ctx.inspect_enabled) return ExecResult::Reject(REJECT_DISABLED_OPCODE);
            if (!ctx.tx) return ExecResult::Reject(REJECT_DISABLED_OPCODE);
            const Transaction& tx = *ctx.tx;
            bool ok = false;
            auto cmp_num = [&](int64_t actual) {
                switch (ins.cmp) {
                case Comparator::Eq: return actual == ins.num;
                case Comparator::Le: return actual <= ins.num;
                case Comparator::Ge: return actual >= ins.num;
                }
                return false;
            };
            switch (ins.field) {
            case InspectField::OutputCount:
                ok = cmp_num(static_cast<int64_t>(tx.outputs.size()));
                break;
            case InspectField::InputCount:
                ok = cmp_num(static_cast<int64_t>(tx.inputs.size()));
                break;
            case InspectField::OutputAmount:
                if (ins.index >= tx.outputs.size()) return ExecResult::Reject(REJECT_FIELD_RANGE);
                ok = cmp_num(static_cast<int64_t>(tx.outputs[ins.index].amount));
                break;
            case InspectField::OutputScript:
                if (ins.index >= tx.outputs.size()) return ExecResult::Reject(REJECT_FIELD_RANGE);
                ok = tx.outputs[ins.index].script == ins.bytes;
                break;
            case InspectField::InputScript: {
                if (ctx.input_index >= tx.inputs.size()) return ExecResult::Reject(REJECT_FIELD_RANGE);
                auto prevout = ctx.prevouts(Outpoint{tx.inputs[ctx.input_index].prev_txid,
                                                     tx.inputs[ctx.input_index].prev_index});
                if (!prevout) return ExecResult::Reject(REJECT_FIELD_RANGE);
                ok = prevout->script == ins.bytes;
                break;
            }
            case InspectField::SumInputAmounts: {
                int64_t sum = 0;
                for (const TxInput& in : tx.inputs) {
                    auto prevout = ctx.prevouts(Outpoint{in.prev_txid, in.prev_index});
                    if (!prevout) return ExecResult::Reject(REJECT_FIELD_RANGE);
                    sum += static_cast<int64_t>(prevout->amount);
                }
                ok = cmp_num(sum);
                break;
            }
            case InspectField::SumOutputAmounts: {
                int64_t sum = 0;
                for (const TxOutput& o : tx.outputs) sum += static_cast<int64_t>(o.amount);
                ok = cmp_num(sum);
                break;
            }
            }
            stack.push_back(ok ? EncodeNum(1) : Bytes{});
            break;
        }
        }
        if (stack.size() > MAX_STACK_SIZE) return ExecResult::Reject(REJECT_STACK_OVERFLOW);
    }

    if (stack.empty()) return ExecResult::Reject(REJECT_FALSE_STACK);
    for (const Bytes& elem : stack) {
        if (!Truthy(elem)) return ExecResult::Reject(REJECT_FALSE_STACK);
    }
    return ExecResult::Accept();
}

} // namespace covlab

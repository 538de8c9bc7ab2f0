// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_SCRIPT_INTERPRETER_H
#define COVLAB_SCRIPT_INTERPRETER_H

#include "crypto/schnorr.h"
#include "script/compiler.h"
#include "txmodel/sighash.h"
#include "txmodel/transaction.h"

#include <functional>
#include <optional>
#include <string>

namespace covlab {

/** Initial stack elements; signatures and zero-length placeholders. */
struct Witness {
    std::vector<Bytes> elements;

    bool operator==(const Witness&) const = default;
};

/** Execution environment: signature message source, confirmed age of the
 *  spent output, transaction view for covenant opcodes, feature flags. */
struct ExecContext {
    uint32_t confirmed_age{0};
    const Transaction* tx{nullptr};
    size_t input_index{0};
    PrevoutView prevouts;
    bool ctv_enabled{false};
    bool inspect_enabled{false};
    // Digest for signature checks when no transaction view is present.
    std::optional<Bytes32> msg_digest;
};

struct ExecResult {
    bool accepted{false};
    std::string reason; // empty when accepted

    static ExecResult Accept() { return {true, ""}; }
    static ExecResult Reject(std::string why) { return {false, std::move(why)}; }
};

// Reject reasons use stable prefixes so callers can dispatch on them.
inline const char* REJECT_STACK_UNDERFLOW = "stack-underflow";
inline const char* REJECT_STACK_OVERFLOW = "stack-overflow";
inline const char* REJECT_DISABLED_OPCODE = "disabled-opcode";
inline const char* REJECT_PREMATURE_LOCK = "premature-lock";
inline const char* REJECT_BAD_SIGNATURE = "bad-signature";
inline const char* REJECT_NUM_MISMATCH = "numequal-mismatch";
inline const char* REJECT_CTV_MISMATCH = "template-mismatch";
inline const char* REJECT_FIELD_RANGE = "inspect-field-out-of-range";
inline const char* REJECT_FALSE_STACK = "final-stack-not-truthy";
inline const char* REJECT_MALFORMED = "malformed-element";

// Executes the program over the witness stack. Accepts iff no instruction
// rejects and the final stack is nonempty with every element truthy.
ExecResult Execute(const ScriptProgram& program, const Witness& witness, const ExecContext& ctx);

// Default template hash: version, input count, per-input sequence, output
// count, serialized outputs, locktime, input index. Witnesses and prevout
// ids are excluded.
Bytes32 CtvTemplateHash(const Transaction& tx, uint32_t input_index);

// Signature digest used for CHECKSIG-family checks under this context.
Bytes32 ExecSignatureDigest(const ExecContext& ctx, SighashFlag flag);

// 65-byte witness signature element: 64-byte signature || flag byte.
Bytes EncodeSigElement(const Signature& sig, SighashFlag flag);

} // namespace covlab

#endif // COVLAB_SCRIPT_INTERPRETER_H

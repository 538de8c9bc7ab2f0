// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "txmodel/transaction.h"

#include "crypto/hash.h"

#include <cstring>
#include <stdexcept>

namespace covlab {

namespace {

class ByteReader
{
public:
    explicit ByteReader(const Bytes& data) : m_data(data) {}

    uint8_t U8()
    {
        Need(1);
        return m_data[m_pos++];
    }
    uint32_t U32()
    {
        Need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(m_data[m_pos + i]) << (8 * i);
        m_pos += 4;
        return v;
    }
    uint64_t U64()
    {
        Need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(m_data[m_pos + i]) << (8 * i);
        m_pos += 8;
        return v;
    }
    Bytes Blob(size_t len)
    {
        Need(len);
        Bytes out(m_data.begin() + m_pos, m_data.begin() + m_pos + len);
        m_pos += len;
        return out;
    }
    Bytes32 Hash()
    {
        Need(32);
        Bytes32 out;
        std::memcpy(out.data(), m_data.data() + m_pos, 32);
        m_pos += 32;
        return out;
    }
    bool AtEnd() const { return m_pos == m_data.size(); }

private:
    void Need(size_t n) const
    {
        if (m_pos + n > m_data.size()) throw std::runtime_error("truncated transaction encoding");
    }
    const Bytes& m_data;
    size_t m_pos{0};
};

} // namespace

Bytes SerializeEffects(const Transaction& tx)
{
    Bytes out;
    AppendU32(out, tx.version);
    AppendU32(out, static_cast<uint32_t>(tx.inputs.size()));
    for (const TxInput& in : tx.inputs) {
        Append(out, in.prev_txid);
        AppendU32(out, in.prev_index);
        AppendU32(out, in.sequence);
        AppendU8(out, in.annex ? 1 : 0);
        if (in.annex) {
            AppendU32(out, static_cast<uint32_t>(in.annex->size()));
            Append(out, *in.annex);
        }
    }
    AppendU32(out, static_cast<uint32_t>(tx.outputs.size()));
    for (const TxOutput& o : tx.outputs) {
        AppendU64(out, o.amount);
        AppendU32(out, static_cast<uint32_t>(o.script.size()));
        Append(out, o.script);
    }
    AppendU32(out, tx.locktime);
    return out;
}

Bytes Serialize(const Transaction& tx)
{
    Bytes out = SerializeEffects(tx);
    AppendU32(out, static_cast<uint32_t>(tx.witnesses.size()));
    for (const WitnessStack& w : tx.witnesses) {
        AppendU32(out, static_cast<uint32_t>(w.size()));
        for (const Bytes& elem : w) {
            AppendU32(out, static_cast<uint32_t>(elem.size()));
            Append(out, elem);
        }
    }
    return out;
}

Transaction Parse(const Bytes& data)
{
    ByteReader r(data);
    Transaction tx;
    tx.version = r.U32();
    uint32_t n_in = r.U32();
    for (uint32_t i = 0; i < n_in; ++i) {
        TxInput in;
        in.prev_txid = r.Hash();
        in.prev_index = r.U32();
        in.sequence = r.U32();
        if (r.U8()) in.annex = r.Blob(r.U32());
        tx.inputs.push_back(std::move(in));
    }
    uint32_t n_out = r.U32();
    for (uint32_t i = 0; i < n_out; ++i) {
        TxOutput o;
        o.amount = r.U64();
        o.script = r.Blob(r.U32());
        tx.outputs.push_back(std::move(o));
    }
    tx.locktime = r.U32();
    uint32_t n_wit = r.U32();
    for (uint32_t i = 0; i < n_wit; ++i) {
        WitnessStack w;
        uint32_t n_elem = r.U32();
        for (uint32_t j = 0; j < n_elem; ++j) w.push_back(r.Blob(r.U32()));
        tx.witnesses.push_back(std::move(w));
    }
    if (!r.AtEnd()) throw std::runtime_error("trailing bytes after transaction");
    return tx;
}

size_t TxSize(const Transaction& tx) { return Serialize(tx).size(); }

Bytes32 Txid(const Transaction& tx)
{
    return TaggedHash("covlab/txid", SerializeEffects(tx));
}

std::optional<uint32_t> DecodeRelativeLock(uint32_t version, uint32_t sequence)
{
    if (version < 2) return std::nullopt;
    if (sequence >= RELATIVE_LOCK_DISABLE) return std::nullopt;
    return sequence;
}

bool SignalsRbf(const Transaction& tx)
{
    for (const TxInput& in : tx.inputs) {
        if (in.sequence < RBF_THRESHOLD) return true;
    }
    return false;
}

Bytes TaprootScript(const Bytes32& output_key_x)
{
    Bytes script;
    script.push_back(0x01);
    Append(script, output_key_x);
    return script;
}

std::optional<Bytes32> TaprootScriptKey(const Bytes& script)
{
    if (script.size() != 33 || script[0] != 0x01) return std::nullopt;
    Bytes32 out;
    std::memcpy(out.data(), script.data() + 1, 32);
    return out;
}

nlohmann::ordered_json TxToJson(const Transaction& tx)
{
    nlohmann::ordered_json j;
    j["version"] = tx.version;
    j["inputs"] = nlohmann::ordered_json::array();
    for (const TxInput& in : tx.inputs) {
        nlohmann::ordered_json ji;
        ji["prev_txid"] = HexStr(in.prev_txid);
        ji["prev_index"] = in.prev_index;
        ji["sequence"] = in.sequence;
        if (in.annex) ji["annex"] = HexStr(*in.annex);
        j["inputs"].push_back(ji);
    }
    j["outputs"] = nlohmann::ordered_json::array();
    for (const TxOutput& o : tx.outputs) {
        nlohmann::ordered_json jo;
        jo["amount"] = o.amount;
        jo["script_hex"] = HexStr(o.script);
        j["outputs"].push_back(jo);
    }
    j["witnesses"] = nlohmann::ordered_json::array();
    for (const WitnessStack& w : tx.witnesses) {
        nlohmann::ordered_json jw = nlohmann::ordered_json::array();
        for (const Bytes& e : w) jw.push_back(HexStr(e));
        j["witnesses"].push_back(jw);
    }
    j["locktime"] = tx.locktime;
    return j;
}

Transaction TxFromJson(const nlohmann::json& j)
{
    Transaction tx;
    tx.version = j.at("version").get<uint32_t>();
    for (const auto& ji : j.at("inputs")) {
        TxInput in;
        Bytes txid = ParseHex(ji.at("prev_txid").get<std::string>());
        if (txid.size() != 32) throw std::runtime_error("prev_txid must be 32 bytes");
        std::memcpy(in.prev_txid.data(), txid.data(), 32);
        in.prev_index = ji.at("prev_index").get<uint32_t>();
        in.sequence = ji.at("sequence").get<uint32_t>();
        if (ji.contains("annex")) in.annex = ParseHex(ji.at("annex").get<std::string>());
        tx.inputs.push_back(std::move(in));
    }
    for (const auto& jo : j.at("outputs")) {
        TxOutput o;
        o.amount = jo.at("amount").get<uint64_t>();
        o.script = ParseHex(jo.at("script_hex").get<std::string>());
        tx.outputs.push_back(std::move(o));
    }
    if (j.contains("witnesses")) {
        for (const auto& jw : j.at("witnesses")) {
            WitnessStack w;
            for (const auto& je : jw) w.push_back(ParseHex(je.get<std::string>()));
            tx.witnesses.push_back(std::move(w));
        }
    }
    tx.locktime = j.at("locktime").get<uint32_t>();
    return tx;
}

} // namespace covlab

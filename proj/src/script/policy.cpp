// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "script/policy.h"

#include <algorithm>
#include <cctype>

namespace covlab {

Policy Policy::Pk(std::string name)
{
    if (name.empty() || name.size() > 16) throw MalformedPolicy("pk name must be 1..16 characters");
    Policy p;
    p.kind = Kind::Pk;
    p.key_name = std::move(name);
    return p;
}

Policy Policy::Older(uint32_t blocks)
{
    if (blocks == 0) throw MalformedPolicy("older(0) is not allowed");
    Policy p;
    p.kind = Kind::Older;
    p.blocks = blocks;
    return p;
}

Policy Policy::And(Policy a, Policy b)
{
    Policy p;
    p.kind = Kind::And;
    p.children.push_back(std::move(a));
    p.children.push_back(std::move(b));
    return p;
}

Policy Policy::Or(Policy a, Policy b)
{
    Policy p;
    p.kind = Kind::Or;
    p.children.push_back(std::move(a));
    p.children.push_back(std::move(b));
    return p;
}

Policy Policy::Thresh(uint32_t k, std::vector<Policy> children)
{
    if (children.empty() || k < 1 || k > children.size()) {
        throw MalformedPolicy("thresh requires 1 <= k <= number of subpolicies");
    }
    Policy p;
    p.kind = Kind::Thresh;
    p.threshold = k;
    p.children = std::move(children);
    return p;
}

namespace {

class PolicyParser
{
public:
    explicit PolicyParser(const std::string& text) : m_text(text) {}

    Policy ParseTop()
    {
        Policy p = ParsePolicy();
        SkipSpace();
        if (m_pos != m_text.size()) throw MalformedPolicy("trailing characters in policy");
        return p;
    }

private:
    Policy ParsePolicy()
    {
        SkipSpace();
        std::string name = ParseWord();
        Expect('(');
        Policy out;
        if (name == "pk") {
            out = Policy::Pk(ParseWord());
        } else if (name == "older") {
            out = Policy::Older(ParseNumber());
        } else if (name == "and") {
            Policy a = ParsePolicy();
            Expect(',');
            Policy b = ParsePolicy();
            out = Policy::And(std::move(a), std::move(b));
        } else if (name == "or") {
            auto [w1, a] = ParseWeighted();
            Expect(',');
            auto [w2, b] = ParseWeighted();
            out = Policy::Or(std::move(a), std::move(b));
            if (w1 || w2) out.or_weights = {w1 ? *w1 : 1, w2 ? *w2 : 1};
        } else if (name == "thresh") {
            uint32_t k = ParseNumber();
            std::vector<Policy> children;
            SkipSpace();
            while (Peek() == ',') {
                Expect(',');
                children.push_back(ParsePolicy());
                SkipSpace();
            }
            out = Policy::Thresh(k, std::move(children));
        } else {
            throw MalformedPolicy("unknown policy fragment: " + name);
        }
        Expect(')');
        return out;
    }

    std::pair<std::optional<uint32_t>, Policy> ParseWeighted()
    {
        SkipSpace();
        size_t save = m_pos;
        if (std::isdigit(static_cast<unsigned char>(Peek()))) {
            uint32_t w = ParseNumber();
            SkipSpace();
            if (Peek() == '@') {
                ++m_pos;
                return {w, ParsePolicy()};
            }
            m_pos = save;
        }
        return {std::nullopt, ParsePolicy()};
    }

    std::string ParseWord()
    {
        SkipSpace();
        size_t start = m_pos;
        while (m_pos < m_text.size() &&
               (std::isalnum(static_cast<unsigned char>(m_text[m_pos])) || m_text[m_pos] == '_')) {
            ++m_pos;
        }
        if (start == m_pos) throw MalformedPolicy("expected identifier");
        return m_text.substr(start, m_pos - start);
    }

    uint32_t ParseNumber()
    {
        SkipSpace();
        size_t start = m_pos;
        while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) ++m_pos;
        if (start == m_pos) throw MalformedPolicy("expected number");
        return static_cast<uint32_t>(std::stoul(m_text.substr(start, m_pos - start)));
    }

    char Peek() const { return m_pos < m_text.size() ? m_text[m_pos] : '\0'; }

    void Expect(char c)
    {
        SkipSpace();
        if (Peek() != c) throw MalformedPolicy(std::string("expected '") + c + "'");
        ++m_pos;
    }

    void SkipSpace()
    {
        while (m_pos < m_text.size() && std::isspace(static_cast<unsigned char>(m_text[m_pos]))) ++m_pos;
    }

    const std::string& m_text;
    size_t m_pos{0};
};

} // namespace

Policy Policy::Parse(const std::string& text) { return PolicyParser(text).ParseTop(); }

std::string Policy::ToString() const
{
    switch (kind) {
    case Kind::Pk: return "pk(" + key_name + ")";
    case Kind::Older: return "older(" + std::to_string(blocks) + ")";
    case Kind::And: return "and(" + children[0].ToString() + "," + children[1].ToString() + ")";
    case Kind::Or: {
        std::string a = children[0].ToString();
        std::string b = children[1].ToString();
        if (!or_weights.empty()) {
            a = std::to_string(or_weights[0]) + "@" + a;
            b = std::to_string(or_weights[1]) + "@" + b;
        }
        return "or(" + a + "," + b + ")";
    }
    case Kind::Thresh: {
        std::string out = "thresh(" + std::to_string(threshold);
        for (const Policy& c : children) out += "," + c.ToString();
        return out + ")";
    }
    }
    return "?";
}

std::vector<std::string> Policy::Keys() const
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto visit = [&](auto&& self, const Policy& p) -> void {
        if (p.kind == Kind::Pk) {
            if (seen.insert(p.key_name).second) out.push_back(p.key_name);
            return;
        }
        for (const Policy& c : p.children) self(self, c);
    };
    visit(visit, *this);
    return out;
}

bool Policy::Satisfied(const std::set<std::string>& signers, bool lock_expired) const
{
    switch (kind) {
    case Kind::Pk: return signers.count(key_name) > 0;
    case Kind::Older: return lock_expired;
    case Kind::And: return children[0].Satisfied(signers, lock_expired) &&
                           children[1].Satisfied(signers, lock_expired);
    case Kind::Or: return children[0].Satisfied(signers, lock_expired) ||
                          children[1].Satisfied(signers, lock_expired);
    case Kind::Thresh: {
        uint32_t count = 0;
        for (const Policy& c : children) {
            if (c.Satisfied(signers, lock_expired)) ++count;
        }
        return count >= threshold;
    }
    }
    return false;
}

} // namespace covlab

// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "analysis/tree_dsl.h"

#include <fstream>
#include <sstream>

namespace covlab {

namespace {

struct Line {
    size_t number;
    size_t indent;
    std::string text;
};

std::vector<Line> SplitLines(const std::string& text)
{
    std::vector<Line> out;
    std::istringstream in(text);
    std::string raw;
    size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        size_t spaces = 0;
        while (spaces < raw.size() && raw[spaces] == ' ') ++spaces;
        std::string body = raw.substr(spaces);
        if (body.empty() || body[0] == '#') continue;
        if (spaces % 2 != 0) throw TreeParseError(number, "odd indentation");
        out.push_back(Line{number, spaces / 2, body});
    }
    return out;
}

struct Token {
    std::string value;
    bool quoted{false};
};

std::vector<Token> Tokenize(const Line& line)
{
    std::vector<Token> out;
    const std::string& s = line.text;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == ' ') {
            ++i;
            continue;
        }
        if (s[i] == '"') {
            size_t end = s.find('"', i + 1);
            if (end == std::string::npos) throw TreeParseError(line.number, "unterminated quote");
            out.push_back(Token{s.substr(i + 1, end - i - 1), true});
            i = end + 1;
            continue;
        }
        size_t end = i;
        while (end < s.size() && s[end] != ' ') ++end;
        out.push_back(Token{s.substr(i, end - i), false});
        i = end;
    }
    return out;
}

// Parses trailing key:value fields (times:, cost:, time:, prob:) into the
// node; returns the label token if present.
void ApplyFields(AttackNode& node, const std::vector<Token>& tokens, size_t start, size_t line)
{
    for (size_t i = start; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.quoted) {
            node.label = t.value;
            continue;
        }
        size_t colon = t.value.find(':');
        if (colon == std::string::npos) throw TreeParseError(line, "unexpected token " + t.value);
        std::string key = t.value.substr(0, colon);
        std::string value = t.value.substr(colon + 1);
        if (key == "times") {
            node.times = value;
        } else if (key == "cost") {
            node.attrs.cost = std::stod(value);
        } else if (key == "time") {
            node.attrs.time = std::stod(value);
        } else if (key == "prob") {
            node.attrs.prob = std::stod(value);
        } else {
            throw TreeParseError(line, "unknown field " + key);
        }
    }
}

AttackNode ParseNode(const std::vector<Line>& lines, size_t& pos, size_t indent)
{
    const Line& line = lines[pos];
    std::vector<Token> tokens = Tokenize(line);
    if (tokens.empty()) throw TreeParseError(line.number, "empty node");
    const std::string& head = tokens[0].value;

    AttackNode node;
    if (head == "OR" || head == "AND" || head == "SAND") {
        node.kind = AttackNode::Kind::Gate;
        node.gate = head == "OR" ? GateKind::Or : head == "AND" ? GateKind::And : GateKind::Sand;
        ApplyFields(node, tokens, 1, line.number);
        ++pos;
        while (pos < lines.size() && lines[pos].indent == indent + 1) {
            node.children.push_back(ParseNode(lines, pos, indent + 1));
        }
        if (pos < lines.size() && lines[pos].indent > indent + 1) {
            throw TreeParseError(lines[pos].number, "indentation jumped");
        }
        if (node.children.empty()) throw TreeParseError(line.number, "gate without children");
        return node;
    }
    if (head == "leaf") {
        node.kind = AttackNode::Kind::Leaf;
        ApplyFields(node, tokens, 1, line.number);
        if (node.label.empty()) throw TreeParseError(line.number, "leaf without label");
        ++pos;
        return node;
    }
    if (head.rfind("ref:", 0) == 0) {
        node.kind = AttackNode::Kind::Ref;
        node.ref_id = head.substr(4);
        if (node.ref_id.empty()) throw TreeParseError(line.number, "ref without id");
        ApplyFields(node, tokens, 1, line.number);
        ++pos;
        return node;
    }
    throw TreeParseError(line.number, "unknown node kind " + head);
}

} // namespace

TreeLibrary ParseTreeLibrary(const std::string& text)
{
    std::vector<Line> lines = SplitLines(text);
    TreeLibrary lib;
    size_t pos = 0;
    while (pos < lines.size()) {
        const Line& header = lines[pos];
        if (header.indent != 0) throw TreeParseError(header.number, "expected tree header");
        std::vector<Token> tokens = Tokenize(header);
        if (tokens.empty() || tokens[0].value != "tree" || tokens.size() < 2) {
            throw TreeParseError(header.number, "expected `tree <id> \"title\"`");
        }
        AttackTree tree;
        tree.id = tokens[1].value;
        for (size_t i = 2; i < tokens.size(); ++i) {
            if (tokens[i].quoted) {
                tree.title = tokens[i].value;
            } else if (tokens[i].value == "constraint" && i + 1 < tokens.size()) {
                tree.constraints.push_back(tokens[++i].value);
            } else {
                throw TreeParseError(header.number, "unexpected header token " + tokens[i].value);
            }
        }
        ++pos;
        if (pos >= lines.size() || lines[pos].indent != 1) {
            throw TreeParseError(header.number, "tree without a root node");
        }
        tree.root = ParseNode(lines, pos, 1);
        if (lib.count(tree.id)) throw TreeParseError(header.number, "duplicate tree " + tree.id);
        lib.emplace(tree.id, std::move(tree));
    }
    return lib;
}

namespace {

void SerializeNode(std::string& out, const AttackNode& node, size_t indent)
{
    out.append(indent * 2, ' ');
    switch (node.kind) {
    case AttackNode::Kind::Gate:
        out += GateName(node.gate);
        if (!node.label.empty()) out += " \"" + node.label + "\"";
        if (!node.times.empty()) out += " times:" + node.times;
        out += '\n';
        for (const AttackNode& c : node.children) SerializeNode(out, c, indent + 1);
        return;
    case AttackNode::Kind::Leaf:
        out += "leaf \"" + node.label + "\"";
        if (!node.times.empty()) out += " times:" + node.times;
        if (node.attrs.cost) out += " cost:" + std::to_string(*node.attrs.cost);
        if (node.attrs.time) out += " time:" + std::to_string(*node.attrs.time);
        if (node.attrs.prob) out += " prob:" + std::to_string(*node.attrs.prob);
        out += '\n';
        return;
    case AttackNode::Kind::Ref:
        out += "ref:" + node.ref_id;
        if (!node.times.empty()) out += " times:" + node.times;
        out += '\n';
        return;
    }
}

} // namespace

std::string SerializeTreeLibrary(const TreeLibrary& lib)
{
    std::string out;
    for (const auto& [id, tree] : lib) {
        out += "tree " + id + " \"" + tree.title + "\"";
        for (const std::string& c : tree.constraints) out += " constraint " + c;
        out += '\n';
        SerializeNode(out, tree.root, 1);
    }
    return out;
}

TreeLibrary LoadTreeLibraryFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tree library: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return ParseTreeLibrary(buf.str());
}

} // namespace covlab

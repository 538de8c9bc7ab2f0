// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_ANALYSIS_TREE_DSL_H
#define COVLAB_ANALYSIS_TREE_DSL_H

#include "analysis/attack_tree.h"

namespace covlab {

class TreeParseError : public std::runtime_error
{
public:
    TreeParseError(size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

// Line-oriented indented format mirroring a nested list:
//
//   tree b "Compromise an HSM" constraint A+B=N
//     OR
//       SAND "Physical attack"
//         leaf "Determine the location" cost:100 time:2 prob:0.5
//         ref:g times:N
//
// Two spaces per indentation level; gate tags OR/AND/SAND, `ref:<id>`,
// `times:<expr>`, quoted labels, optional leaf attribute fields.
TreeLibrary ParseTreeLibrary(const std::string& text);
std::string SerializeTreeLibrary(const TreeLibrary& lib);

TreeLibrary LoadTreeLibraryFile(const std::string& path);

} // namespace covlab

#endif // COVLAB_ANALYSIS_TREE_DSL_H

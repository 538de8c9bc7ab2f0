// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef COVLAB_ANALYSIS_REVAULT_LIBRARY_H
#define COVLAB_ANALYSIS_REVAULT_LIBRARY_H

#include "analysis/tree_dsl.h"

namespace covlab {

// The bundled library: 11 shared sub-trees (a..k) and 11 attack trees
// (A..K). Ships structure only; scenarios supply leaf attributes.
TreeLibrary LoadRevaultLibrary(const std::string& data_dir = COVLAB_DATA_DIR);

// Default parameters (N watchtowers, M=3 managers at threshold K=2, single
// deposit/unvault/emergency outputs, A+B=N split).
ParamMap DefaultRevaultParams(int64_t n = 2);

// Parameters adjusted to the constraint carried by the given tree (or its
// referenced sub-trees).
ParamMap RevaultParamsFor(const TreeLibrary& lib, const std::string& id, int64_t n);

// Deterministic leaf attributes for property tests and scenario defaults.
LeafAttributes SeededAttributes(uint64_t seed, const std::string& label);

} // namespace covlab

#endif // COVLAB_ANALYSIS_REVAULT_LIBRARY_H

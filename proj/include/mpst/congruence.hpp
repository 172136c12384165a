#pragma once

#include "mpst/ast.hpp"

namespace mpst {

// Canonical representative of a process's structural-congruence class:
// parallel components flattened and sorted (alpha-invariantly), inert nils
// dropped, restrictions and definitions hoisted maximally (alpha-renaming on
// clashes; a definition never crosses a restriction binding a session the
// declaration mentions), unused restrictions and uncalled definitions removed,
// binders reordered deterministically, choice arms label-sorted, and the same
// applied recursively inside continuations and definition bodies.
ProcPtr normal_form(const ProcPtr& p);

// congruent(P, Q) iff normal_form(P) struct_equal normal_form(Q).
bool congruent(const ProcPtr& a, const ProcPtr& b);

}  // namespace mpst

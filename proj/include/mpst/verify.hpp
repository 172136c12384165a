#pragma once

#include "mpst/analysis.hpp"
#include "mpst/typecheck.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mpst {

// A closed system split at its top-level annotated restrictions (walking
// through definitions): the body is left open and the removed sessions'
// channels are expected to follow the projections of their annotations.
// Propagates ProjectError when an annotation does not project.
struct OpenSystem {
  ProcPtr open;
  Typing expect;
};
OpenSystem peel_annotated(const ProcPtr& p);

// Preservation harness. For every transition P -> P' (enumerated per redex,
// before merging) within `depth` of the opened system, the target must
// re-check under the unchanged typing or under a labelled reduction of it
// whose interval contains p * next_proc(P).
struct SRViolation {
  std::vector<std::string> trace;  // "label @ prob" entries, root first
  std::string detail;
};
struct SRReport {
  bool applicable = false;
  std::string reason;  // engaged when !applicable
  int states = 0;
  int transitions = 0;
  std::vector<SRViolation> violations;
  bool ok() const { return applicable && violations.empty(); }
};
SRReport verify_subject_reduction(const Sorting& gamma, const ProcPtr& p, int depth);

// Breadth-first search over congruence classes with no typing precondition,
// reporting stuck states that are not congruent to inaction. frontier_alive
// marks a live state cut off by the depth bound, i.e. the search was not
// exhaustive.
struct StuckState {
  std::string state;
  std::vector<std::string> trace;
};
struct StuckSearch {
  int states = 0;
  bool frontier_alive = false;
  std::vector<StuckState> stuck_non_nil;
};
StuckSearch find_stuck_states(const ProcPtr& p, int depth);

// Deadlock-freedom harness. Preconditions: the process type-checks closed and
// has the single-session shape (one annotated restriction over parallel
// components, each interacting on the channels of exactly one role of that
// session); otherwise NotApplicable. Exploration then demands every stuck
// reachable state be congruent to inaction; Inconclusive when the depth bound
// cut the search short.
enum class DFVerdict { DeadlockFree, Violation, Inconclusive, NotApplicable };
struct DFReport {
  DFVerdict verdict = DFVerdict::NotApplicable;
  std::string reason;
  int states = 0;
  std::vector<StuckState> stuck_non_nil;
};
DFReport check_deadlock_freedom(const ProcPtr& p, int depth);

struct PropertyResult {
  std::string suite;
  std::string subject;
  bool pass = false;
  std::string detail;
};

// Environment and value transformations that must preserve the judgement:
// a fresh end entry added to the typing, unused additions to the sorting and
// their removal, and substitution of a sorted value for an abstracted payload.
std::vector<PropertyResult> verify_lemma_properties(const Sorting& gamma,
                                                    const std::string& subject,
                                                    const ProcPtr& p);

// Single-axiom rewrites of the process at every position, in both directions
// where the side conditions allow: parallel unit, commutativity and
// associativity, scope extrusion over restrictions and definitions, swaps of
// adjacent binders, alpha-renaming of restrictions, and removal of an unused
// unannotated restriction. Every rewrite is congruent to the original.
std::vector<std::pair<std::string, ProcPtr>> congruence_rewrites(const ProcPtr& p);

// Checks that type_check agrees across every generated rewrite: same typing
// when the original checks, still rejected when it does not.
std::vector<PropertyResult> verify_congruence_invariance(const Sorting& gamma,
                                                         const std::string& subject,
                                                         const ProcPtr& p);

// Intersection property on an open system: the two expectations must have
// equal erasures, each must admit the process, and then their pointwise meet
// must admit it as well.
std::vector<PropertyResult> verify_intersection(const Sorting& gamma, const std::string& subject,
                                                const ProcPtr& open, const Typing& a,
                                                const Typing& b);

struct VerifyReport {
  std::vector<PropertyResult> rows;
  bool all_pass() const;
};

// Full harness over the shipped fixtures: verdict pins, checker determinism,
// congruence invariance, preservation, deadlock freedom, the environment
// lemmas, the k-step sum audit, and the intersection suite over the
// interval-variant annotations.
VerifyReport verify_corpus(const std::string& fixtures_dir);

}  // namespace mpst

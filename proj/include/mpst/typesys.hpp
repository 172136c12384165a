#pragma once

#include "mpst/ast.hpp"
#include "mpst/types.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpst {

struct IntervalSetVerdict {
  bool proper;
  bool reachable;
};

// proper:    sum of lower bounds <= 1 <= sum of upper bounds.
// reachable: for every index i, both endpoints of delta_i extend to a total
//            distribution with the remaining intervals:
//              (sum_{j != i} lo_j) + hi_i <= 1 <= (sum_{j != i} hi_j) + lo_i.
// Exact rational arithmetic throughout.
IntervalSetVerdict classify_interval_set(const std::vector<ImpreciseProb>& deltas);

struct ProjectError : std::runtime_error {
  ProjectError(std::string kind_, std::string path_, const std::string& detail)
      : std::runtime_error(detail), kind(std::move(kind_)), path(std::move(path_)) {}
  std::string kind;  // "non-mergeable-branches" | "self-communication"
  std::string path;  // label path from the root, e.g. "/talk/yes"
};

// Endpoint view of a global type for one role: selections where the role
// sends, branchings where it receives, and for interactions it does not take
// part in, the common projection of all branches (which must agree up to
// equi-recursive equality). A recursion whose projected body is end, or the
// bare recursion variable, collapses to end.
LocalPtr project(const GlobalPtr& g, const Name& role);

// Roles occurring in interactions of g, sorted.
std::vector<Name> roles_of(const GlobalPtr& g);

struct WfBadSet {
  std::string path;   // label path of the offending interaction
  std::string shown;  // the interval set as written, e.g. "{[0,1],[19/20,1]}"
  bool proper;
  bool reachable;
};

struct WfReport {
  bool ok = false;
  std::map<Name, LocalPtr> projections;   // roles whose projection is defined
  std::map<Name, std::string> undefined;  // role -> reason
  std::vector<WfBadSet> bad_interval_sets;
};

// A global type is well formed when every occurring role projects and every
// interaction's interval set is reachable.
WfReport well_formed(const GlobalPtr& g);

ErasedPtr erase(const LocalPtr& t);

// Replaces top-level recursions by their unfoldings until a communication
// constructor, end, or a free variable is exposed. Closed inputs stay closed.
LocalPtr unfold_head(const LocalPtr& t);

// Equi-recursive equality: bisimulation on the unfolding graphs.
bool type_equal(const LocalPtr& a, const LocalPtr& b);
// Same relation on the probability erasures, without materializing them.
bool erased_type_equal(const LocalPtr& a, const LocalPtr& b);

// Every interval widened to [0,1]; the identity of intersection on a given
// erased shape.
LocalPtr unit_intervals(const LocalPtr& t);
GlobalPtr unit_intervals(const GlobalPtr& g);

struct IntersectUndefined {
  std::string kind;  // "empty-interval" | "shape-mismatch" | "domain-mismatch"
  std::string detail;
};

struct IntersectResult {
  LocalPtr type;  // null iff undefined
  std::optional<IntersectUndefined> undefined;
};

// Pointwise interval intersection over two types of the same erased shape.
// The role parameter names the endpoint the types describe; it does not
// influence the result. Walks the two syntax trees in lockstep; a shape
// disagreement (even between equi-recursively equal presentations) is
// reported as shape-mismatch, an empty interval meet as empty-interval.
IntersectResult intersect_local(const LocalPtr& a, const LocalPtr& b, const Name& role);

// Channel-indexed typing environment. Entries for distinct channels are
// independent; composition of typings requires disjoint domains.
using Typing = std::map<Channel, LocalPtr>;

IntersectResult intersect_typing_entry(const Channel& c, const LocalPtr& a, const LocalPtr& b);

struct TypingIntersection {
  Typing typing;  // meaningful iff !undefined
  std::optional<IntersectUndefined> undefined;
};

// Pointwise intersection of two typings with equal domains.
TypingIntersection intersect_typing(const Typing& a, const Typing& b);

}  // namespace mpst

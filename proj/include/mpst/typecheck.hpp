#pragma once

#include "mpst/ast.hpp"
#include "mpst/step.hpp"
#include "mpst/typesys.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mpst {

// Signature of a process definition: one entry per parameter position,
// a sort for value parameters and a local type for channel parameters.
struct ProcSig {
  std::vector<std::variant<Sort, LocalPtr>> params;

  std::vector<Sort> sorts() const;            // value positions, in order
  std::vector<LocalPtr> chan_types() const;   // channel positions, in order
};

// Environment of the judgement: sorts for free value variables, signatures
// for externally declared process variables.
struct Sorting {
  std::map<Name, Sort> var_sorts;
  std::map<Name, ProcSig> proc_sigs;
};

enum class CheckMode { Subset, Strict };

struct TypeError {
  std::string kind;
  std::string detail;
  std::vector<std::string> path;  // derivation trail from the root to the failure
};

struct CheckWarning {
  std::string kind;
  std::string detail;
};

struct CheckResult {
  std::optional<Typing> typing;  // engaged iff the check succeeded
  std::optional<TypeError> error;
  std::vector<CheckWarning> warnings;

  bool ok() const { return typing.has_value(); }
};

// Checks a process whose session channels are all bound by annotated
// restrictions. Restriction annotations drive the reconstruction: the bound
// session's channels are expected to follow the projections of the annotation
// and must be consumed down to end. In Subset mode a selection may use a
// subset J of the labels I of its selection type provided its probabilities
// sum to 1, each lies in its interval, and every omitted label's interval
// contains 0; Strict mode requires J = I. Successful results carry the typing
// of the process's free channels (empty for a closed process); warnings carry
// non-reachable interval sets of annotations.
CheckResult type_check(const Sorting& gamma, const ProcPtr& p, CheckMode mode = CheckMode::Subset);

// Same algorithm with an explicit expectation for free channels: the typing
// claimed for p is `expect`, and the check validates that p uses each entry
// exactly so.
CheckResult type_check_with(const Sorting& gamma, const Typing& expect, const ProcPtr& p,
                            CheckMode mode = CheckMode::Subset);

// One labelled reduction of a typing: a selection/branching pair on the same
// session advances both entries along a common label, yielding the interval
// attached to that label; all other entries are framed unchanged.
struct TypeStep {
  TransitionLabel label;
  ImpreciseProb delta;
  Typing target;
};

// All matches of the communication rule for the given label within delta;
// recursive entries are unfolded on demand. Empty for eps and for labels with
// no matching pair.
std::vector<TypeStep> type_step(const Typing& delta, const TransitionLabel& label);

std::string typing_string(const Typing& delta);

}  // namespace mpst

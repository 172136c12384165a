#pragma once

#include "mpst/ast.hpp"

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mpst {

struct EpsLabel {
  friend bool operator==(const EpsLabel&, const EpsLabel&) = default;
};
// Communication observable (from, to, label).
struct CommLabel {
  Name from;
  Name to;
  Name label;
  friend bool operator==(const CommLabel&, const CommLabel&) = default;
};
using TransitionLabel = std::variant<EpsLabel, CommLabel>;

std::string label_string(const TransitionLabel& l);

inline bool label_equal(const TransitionLabel& a, const TransitionLabel& b) {
  return a == b;
}

struct Step {
  TransitionLabel label;
  Rational prob;    // effective probability: branch probability / next_proc
  ProcPtr target;   // in normal form
};

// A single redex firing, before congruent targets are merged.
struct RawStep {
  TransitionLabel label;
  Rational prob;         // branch_prob / next_proc
  Rational branch_prob;  // probability declared on the fired arm (1 for a call)
  ProcPtr target;        // in normal form
};

struct StepDiagnostic {
  std::string kind;  // "comm-mismatch" | "arity-mismatch"
  std::string detail;
};

struct StepResult {
  std::vector<Step> steps;  // merged by (label, target congruence class), sorted
  std::vector<StepDiagnostic> diagnostics;
};

struct RawStepResult {
  std::vector<RawStep> steps;
  std::vector<StepDiagnostic> diagnostics;
};

// A selection participating in an enabled redex whose probabilities do not sum
// to 1 poisons the step distribution and is reported as this error.
struct StepError : std::runtime_error {
  StepError(std::string kind_, const std::string& detail)
      : std::runtime_error(kind_ + ": " + detail), kind(std::move(kind_)) {}
  std::string kind;
};

// Number of enabled communication redexes plus enabled call redexes in
// normal_form(p); the uniform-scheduler normalizer for step probabilities.
int next_proc(const ProcPtr& p);

// All transitions enabled in normal_form(p). Steps whose targets are
// congruent and that carry the same label are merged by summing
// probabilities; the result is sorted by (label, target key). Probabilities
// over nonempty results sum to exactly 1.
StepResult enabled_steps(const ProcPtr& p);

// Per-redex enumeration without merging; what the per-transition statements
// of the metatheory quantify over.
RawStepResult enabled_steps_raw(const ProcPtr& p);

}  // namespace mpst

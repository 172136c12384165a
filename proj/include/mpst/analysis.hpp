#pragma once

#include "mpst/step.hpp"
#include "mpst/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpst {

// A finite run prefix: the origin plus the merged transitions taken, each
// step's target congruent to the source of the next. Runs are collapsed up to
// congruence of their states; merged transitions make the collapse exact.
struct EvolutionPath {
  ProcPtr origin;
  std::vector<Step> steps;
  Rational probability() const;  // product of the step probabilities, 1 if empty
};

// One state of the k-step distribution. `state` is the congruence-class
// representative; absorbed iff the state has no enabled transitions.
struct ReachEntry {
  ProcPtr state;
  Rational mass;
  bool absorbed;
};

// Cap on distinct states (reach) or emitted runs (enumerate_paths).
// Default 100000, overridable via the MPST_EXPLOSION_CAP environment variable.
std::size_t explosion_cap();

struct AnalysisLimits {
  std::size_t cap;
  AnalysisLimits() : cap(explosion_cap()) {}
  explicit AnalysisLimits(std::size_t c) : cap(c) {}
};

struct ExplosionGuard : std::runtime_error {
  explicit ExplosionGuard(std::size_t limit_);
  std::size_t limit;
};

// All runs from p that either end in a stuck state or make exactly `depth`
// transitions. A stuck origin yields the single empty run of probability 1.
// Output follows the per-state transition order, so it is deterministic.
std::vector<EvolutionPath> enumerate_paths(const ProcPtr& p, int depth,
                                           const AnalysisLimits& limits = AnalysisLimits());

// The k-step distribution of the induced chain over congruence classes, with
// stuck states absorbing once they have entered a distribution. A stuck
// origin has no transitions at all, so the result is empty for every k.
// Entries are sorted by decreasing mass, ties by representative key; over a
// nonempty result the masses sum to exactly 1.
std::vector<ReachEntry> reach(const ProcPtr& p, int k,
                              const AnalysisLimits& limits = AnalysisLimits());

// Sum of the k-step masses; nullopt ("not computed") when the distribution
// is empty.
std::optional<Rational> total_probability(const ProcPtr& p, int k,
                                          const AnalysisLimits& limits = AnalysisLimits());

struct SimOptions {
  std::size_t step_cap = 64;  // per-trial transition budget
  GlobalPtr reference;        // when set, audit first steps against its root arms
};

struct LabelCount {
  std::size_t depth;  // transitions taken before this one
  std::string label;
  std::uint64_t count;
};

// Conformance of one first-step label. `margin` is the 3-sigma binomial
// half-width at the declared probability; `within_delta` additionally places
// the empirical frequency inside the reference interval widened by the same
// margin, when a reference type was supplied and carries the label.
struct AuditRow {
  std::string label;
  Rational declared;
  std::uint64_t count = 0;
  double empirical = 0.0;
  double margin = 0.0;
  bool within_declared = false;
  std::optional<ImpreciseProb> delta;
  std::optional<bool> within_delta;
  bool pass = false;
};

struct SimReport {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t step_cap = 0;
  std::uint64_t quiescent = 0;          // trials that reached a stuck state
  std::vector<LabelCount> label_freq;   // sorted by (depth, label)
  std::vector<AuditRow> audit;          // first-step rows, in transition order
};

// Runs `trials` independent traces, sampling merged transitions by their
// exact probabilities. Randomness is SplitMix64 with a per-trial stream keyed
// by (seed, trial index), so identical inputs give bit-identical reports
// regardless of how the trials are scheduled.
SimReport simulate(const ProcPtr& p, std::uint64_t trials, std::uint64_t seed,
                   const SimOptions& opts = SimOptions());

}  // namespace mpst

#pragma once

#include "mpst/analysis.hpp"
#include "mpst/typecheck.hpp"
#include "mpst/verify.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace mpst {

using Json = nlohmann::json;

// Exact "num/den" rendering used in machine-readable reports; the denominator
// is always explicit ("1/1", "3/5"). Verdicts never contain floating point.
std::string json_rational(const Rational& r);

// Six-digit decimal approximation carried alongside exact values for human
// consumption; never used in comparisons.
std::string approx_string(const Rational& r);

Json json_interval(const ImpreciseProb& d);
Json json_typing(const Typing& delta);
Json json_check(const CheckResult& r);
Json json_wf(const WfReport& r);
Json json_steps(const StepResult& r);
Json json_paths(const std::vector<EvolutionPath>& paths);
Json json_reach(const std::vector<ReachEntry>& entries, const std::optional<Rational>& total);
Json json_sim(const SimReport& rep);
Json json_verify(const VerifyReport& rep);

}  // namespace mpst

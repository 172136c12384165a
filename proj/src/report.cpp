#include "mpst/report.hpp"

#include "mpst/print.hpp"

#include <cstdio>

namespace mpst {

std::string json_rational(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string approx_string(const Rational& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", rational_double(r));
  return buf;
}

Json json_interval(const ImpreciseProb& d) {
  return Json{{"lo", json_rational(d.lo)}, {"hi", json_rational(d.hi)}};
}

Json json_typing(const Typing& delta) {
  Json entries = Json::object();
  for (const auto& [chan, type] : delta) entries[chan.display()] = pretty_print(type);
  return entries;
}

Json json_check(const CheckResult& r) {
  Json out;
  out["ok"] = r.ok();
  if (r.ok()) out["typing"] = json_typing(*r.typing);
  if (r.error)
    out["error"] = Json{{"kind", r.error->kind},
                        {"detail", r.error->detail},
                        {"path", r.error->path}};
  Json warnings = Json::array();
  for (const auto& w : r.warnings)
    warnings.push_back(Json{{"kind", w.kind}, {"detail", w.detail}});
  out["warnings"] = std::move(warnings);
  return out;
}

Json json_wf(const WfReport& r) {
  Json out;
  out["ok"] = r.ok;
  Json projections = Json::object();
  for (const auto& [role, type] : r.projections) projections[role] = pretty_print(type);
  out["projections"] = std::move(projections);
  Json undefined = Json::object();
  for (const auto& [role, reason] : r.undefined) undefined[role] = reason;
  out["undefined"] = std::move(undefined);
  Json bad = Json::array();
  for (const auto& set : r.bad_interval_sets)
    bad.push_back(Json{{"path", set.path},
                       {"set", set.shown},
                       {"proper", set.proper},
                       {"reachable", set.reachable}});
  out["badIntervalSets"] = std::move(bad);
  return out;
}

Json json_steps(const StepResult& r) {
  Json steps = Json::array();
  for (const auto& st : r.steps)
    steps.push_back(Json{{"label", label_string(st.label)},
                         {"prob", json_rational(st.prob)},
                         {"approx", approx_string(st.prob)},
                         {"target", pretty_print(st.target)}});
  Json diagnostics = Json::array();
  for (const auto& d : r.diagnostics)
    diagnostics.push_back(Json{{"kind", d.kind}, {"detail", d.detail}});
  return Json{{"count", r.steps.size()},
              {"steps", std::move(steps)},
              {"diagnostics", std::move(diagnostics)}};
}

Json json_paths(const std::vector<EvolutionPath>& paths) {
  Json arr = Json::array();
  for (const auto& ep : paths) {
    Json steps = Json::array();
    for (const auto& st : ep.steps)
      steps.push_back(Json{{"label", label_string(st.label)},
                           {"prob", json_rational(st.prob)},
                           {"target", pretty_print(st.target)}});
    arr.push_back(Json{{"origin", pretty_print(ep.origin)},
                       {"steps", std::move(steps)},
                       {"prob", json_rational(ep.probability())},
                       {"approx", approx_string(ep.probability())}});
  }
  return Json{{"count", paths.size()}, {"paths", std::move(arr)}};
}

Json json_reach(const std::vector<ReachEntry>& entries, const std::optional<Rational>& total) {
  Json arr = Json::array();
  for (const auto& e : entries)
    arr.push_back(Json{{"state", pretty_print(e.state)},
                       {"mass", json_rational(e.mass)},
                       {"approx", approx_string(e.mass)},
                       {"absorbed", e.absorbed}});
  Json out{{"entries", std::move(arr)}};
  if (total)
    out["total"] = json_rational(*total);
  else
    out["total"] = nullptr;
  return out;
}

Json json_sim(const SimReport& rep) {
  Json freq = Json::array();
  for (const auto& lc : rep.label_freq)
    freq.push_back(Json{{"depth", lc.depth}, {"label", lc.label}, {"count", lc.count}});
  Json audit = Json::array();
  for (const auto& row : rep.audit) {
    Json j{{"label", row.label},
           {"declared", json_rational(row.declared)},
           {"count", row.count},
           {"empirical", row.empirical},
           {"margin", row.margin},
           {"withinDeclared", row.within_declared},
           {"pass", row.pass}};
    if (row.delta) j["interval"] = json_interval(*row.delta);
    if (row.within_delta) j["withinInterval"] = *row.within_delta;
    audit.push_back(std::move(j));
  }
  return Json{{"trials", rep.trials},
              {"seed", rep.seed},
              {"stepCap", rep.step_cap},
              {"quiescent", rep.quiescent},
              {"labelFreq", std::move(freq)},
              {"audit", std::move(audit)}};
}

Json json_verify(const VerifyReport& rep) {
  Json rows = Json::array();
  std::size_t failures = 0;
  for (const auto& row : rep.rows) {
    if (!row.pass) ++failures;
    rows.push_back(Json{{"suite", row.suite},
                        {"subject", row.subject},
                        {"pass", row.pass},
                        {"detail", row.detail}});
  }
  return Json{{"allPass", rep.all_pass()},
              {"rows", std::move(rows)},
              {"failures", failures}};
}

}  // namespace mpst

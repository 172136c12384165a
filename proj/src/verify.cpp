#include "mpst/verify.hpp"

#include "mpst/congruence.hpp"
#include "mpst/parse.hpp"
#include "mpst/print.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mpst {

OpenSystem peel_annotated(const ProcPtr& p) {
  OpenSystem out;
  std::function<ProcPtr(const ProcPtr&)> go = [&](const ProcPtr& q) -> ProcPtr {
    if (const auto* def = std::get_if<PDef>(&q->node))
      return p_def(def->name, def->params, def->body, go(def->scope));
    if (const auto* res = std::get_if<PRestrict>(&q->node); res != nullptr && res->annotation) {
      for (const auto& role : roles_of(res->annotation))
        out.expect[Channel{res->session, role}] = project(res->annotation, role);
      return go(res->body);
    }
    return q;
  };
  out.open = go(p);
  return out;
}

SRReport verify_subject_reduction(const Sorting& gamma, const ProcPtr& p, int depth) {
  SRReport rep;
  auto root_check = type_check(gamma, p);
  if (!root_check.ok()) {
    rep.reason = "root does not type-check: " + root_check.error->kind + ": " +
                 root_check.error->detail;
    return rep;
  }
  OpenSystem sys = peel_annotated(p);
  auto open_check = type_check_with(gamma, sys.expect, sys.open);
  if (!open_check.ok()) {
    rep.reason = "opened system rejects its own projections: " + open_check.error->kind;
    return rep;
  }
  rep.applicable = true;

  struct NodeInfo {
    ProcPtr state;
    Typing typing;
    std::vector<std::string> trace;
    int dist;
  };
  ProcPtr root = normal_form(sys.open);
  std::deque<NodeInfo> queue;
  std::set<std::pair<std::string, std::string>> seen;
  queue.push_back(NodeInfo{root, sys.expect, {}, 0});
  seen.insert({canonical_key(root), typing_string(sys.expect)});

  while (!queue.empty()) {
    NodeInfo node = std::move(queue.front());
    queue.pop_front();
    ++rep.states;
    if (node.dist >= depth) continue;
    int m = next_proc(node.state);
    auto raw = enabled_steps_raw(node.state);
    for (const auto& rs : raw.steps) {
      ++rep.transitions;
      Rational weight = rs.prob * m;
      std::vector<Typing> candidates;
      if (std::holds_alternative<CommLabel>(rs.label)) {
        for (auto& ts : type_step(node.typing, rs.label))
          if (ts.delta.contains(weight)) candidates.push_back(std::move(ts.target));
      }
      candidates.push_back(node.typing);
      std::optional<Typing> chosen;
      for (auto& cand : candidates) {
        if (type_check_with(gamma, cand, rs.target).ok()) {
          chosen = std::move(cand);
          break;
        }
      }
      std::string step_desc = label_string(rs.label) + " @ " + rational_string(rs.prob);
      if (!chosen) {
        SRViolation v;
        v.trace = node.trace;
        v.trace.push_back(step_desc);
        v.detail = "target re-checks under no admissible typing reduction; p * next_proc = " +
                   rational_string(weight) + "; typing was " + typing_string(node.typing);
        rep.violations.push_back(std::move(v));
        continue;
      }
      std::pair<std::string, std::string> key{canonical_key(rs.target), typing_string(*chosen)};
      if (seen.insert(key).second) {
        auto trace = node.trace;
        trace.push_back(step_desc);
        queue.push_back(NodeInfo{rs.target, std::move(*chosen), std::move(trace), node.dist + 1});
      }
    }
  }
  return rep;
}

StuckSearch find_stuck_states(const ProcPtr& p, int depth) {
  StuckSearch out;
  const std::string nil_key = canonical_key(p_nil());
  struct Node {
    ProcPtr state;
    std::vector<std::string> trace;
    int dist;
  };
  ProcPtr root = normal_form(p);
  std::deque<Node> queue;
  std::set<std::string> seen;
  queue.push_back(Node{root, {}, 0});
  seen.insert(canonical_key(root));
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    ++out.states;
    auto st = enabled_steps(node.state);
    if (st.steps.empty()) {
      if (canonical_key(node.state) != nil_key)
        out.stuck_non_nil.push_back(StuckState{pretty_print(node.state), node.trace});
      continue;
    }
    if (node.dist >= depth) {
      out.frontier_alive = true;
      continue;
    }
    for (const auto& s : st.steps) {
      if (seen.insert(canonical_key(s.target)).second) {
        auto trace = node.trace;
        trace.push_back(label_string(s.label) + " @ " + rational_string(s.prob));
        queue.push_back(Node{s.target, std::move(trace), node.dist + 1});
      }
    }
  }
  return out;
}

namespace {

std::vector<ProcPtr> flatten_par_atoms(const ProcPtr& p) {
  std::vector<ProcPtr> atoms;
  std::vector<ProcPtr> stack{p};
  while (!stack.empty()) {
    ProcPtr cur = stack.back();
    stack.pop_back();
    if (const auto* par = std::get_if<PPar>(&cur->node)) {
      stack.push_back(par->right);
      stack.push_back(par->left);
    } else {
      atoms.push_back(cur);
    }
  }
  return atoms;
}

// One annotated restriction over parallel components, each confined to the
// channels of a single role of that session, roles pairwise distinct.
std::optional<std::string> single_session_shape_violation(const ProcPtr& p) {
  ProcPtr cur = p;
  while (const auto* def = std::get_if<PDef>(&cur->node)) cur = def->scope;
  const auto* res = std::get_if<PRestrict>(&cur->node);
  if (res == nullptr || !res->annotation) return "no top-level annotated restriction";
  Name session = res->session;
  ProcPtr body = res->body;
  while (const auto* def = std::get_if<PDef>(&body->node)) body = def->scope;
  std::set<Name> used_roles;
  for (const ProcPtr& atom : flatten_par_atoms(body)) {
    std::optional<Name> role;
    for (const Channel& c : binder_report(atom).free_channels) {
      if (c.name != session)
        return "component uses channel " + c.display() + " outside session " + session;
      if (!c.role) return "component uses the bare session name " + c.name;
      if (role && *role != *c.role)
        return "component uses two roles: " + *role + " and " + *c.role;
      role = *c.role;
    }
    if (role && !used_roles.insert(*role).second)
      return "role " + *role + " is used by two components";
  }
  return std::nullopt;
}

}  // namespace

DFReport check_deadlock_freedom(const ProcPtr& p, int depth) {
  DFReport rep;
  auto chk = type_check({}, p);
  if (!chk.ok()) {
    rep.reason = "process does not type-check: " + chk.error->kind + ": " + chk.error->detail;
    return rep;
  }
  if (auto shape = single_session_shape_violation(p)) {
    rep.reason = *shape;
    return rep;
  }
  auto search = find_stuck_states(p, depth);
  rep.states = search.states;
  rep.stuck_non_nil = search.stuck_non_nil;
  if (!search.stuck_non_nil.empty()) {
    rep.verdict = DFVerdict::Violation;
  } else if (search.frontier_alive) {
    rep.verdict = DFVerdict::Inconclusive;
    rep.reason = "depth bound hit with live states unexplored";
  } else {
    rep.verdict = DFVerdict::DeadlockFree;
  }
  return rep;
}

namespace {

std::string show_value(const Value& v) {
  if (const auto* s = std::get_if<StrVal>(&v)) return s->text;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* n = std::get_if<std::int64_t>(&v)) return std::to_string(*n);
  return std::get<SessionRef>(v).name;
}

struct Abstraction {
  ProcPtr process;  // original with one payload literal replaced by the hole
  Value original;
  Sort sort;
  std::string site;  // label of the arm the payload sat in
};

// Replaces the first payload literal of a base sort (never a variable
// occurrence) with a fresh variable, to build substitution instances.
bool abstract_payload(const ProcPtr& p, std::set<Name>& bound, const Name& hole,
                      Abstraction& out) {
  if (const auto* sel = std::get_if<PSelect>(&p->node)) {
    for (std::size_t i = 0; i < sel->arms.size(); ++i) {
      const SelectArmP& arm = sel->arms[i];
      std::optional<Sort> sort;
      if (const auto* s = std::get_if<StrVal>(&arm.payload)) {
        if (!bound.count(s->text)) sort = Sort::Str;
      } else if (const auto* n = std::get_if<std::int64_t>(&arm.payload)) {
        sort = *n >= 0 ? Sort::Nat : Sort::Int;
      } else if (std::holds_alternative<bool>(arm.payload)) {
        sort = Sort::Bool;
      }
      if (sort) {
        auto arms = sel->arms;
        arms[i].payload = StrVal{hole};
        out.process = p_select(sel->chan, sel->partner, std::move(arms));
        out.original = arm.payload;
        out.sort = *sort;
        out.site = arm.label;
        return true;
      }
      Abstraction sub;
      if (abstract_payload(arm.cont, bound, hole, sub)) {
        auto arms = sel->arms;
        arms[i].cont = sub.process;
        sub.process = p_select(sel->chan, sel->partner, std::move(arms));
        out = std::move(sub);
        return true;
      }
    }
    return false;
  }
  if (const auto* bra = std::get_if<PBranch>(&p->node)) {
    for (std::size_t i = 0; i < bra->arms.size(); ++i) {
      const BranchArmP& arm = bra->arms[i];
      bool fresh = bound.insert(arm.binder).second;
      Abstraction sub;
      bool found = abstract_payload(arm.cont, bound, hole, sub);
      if (fresh) bound.erase(arm.binder);
      if (found) {
        auto arms = bra->arms;
        arms[i].cont = sub.process;
        sub.process = p_branch(bra->chan, bra->partner, std::move(arms));
        out = std::move(sub);
        return true;
      }
    }
    return false;
  }
  if (const auto* res = std::get_if<PRestrict>(&p->node)) {
    Abstraction sub;
    if (abstract_payload(res->body, bound, hole, sub)) {
      sub.process = p_restrict(res->session, sub.process, res->annotation);
      out = std::move(sub);
      return true;
    }
    return false;
  }
  if (const auto* def = std::get_if<PDef>(&p->node)) {
    std::vector<Name> added;
    for (const Name& param : def->params)
      if (bound.insert(param).second) added.push_back(param);
    Abstraction sub;
    bool found = abstract_payload(def->body, bound, hole, sub);
    for (const Name& param : added) bound.erase(param);
    if (found) {
      sub.process = p_def(def->name, def->params, sub.process, def->scope);
      out = std::move(sub);
      return true;
    }
    if (abstract_payload(def->scope, bound, hole, sub)) {
      sub.process = p_def(def->name, def->params, def->body, sub.process);
      out = std::move(sub);
      return true;
    }
    return false;
  }
  if (const auto* par = std::get_if<PPar>(&p->node)) {
    Abstraction sub;
    if (abstract_payload(par->left, bound, hole, sub)) {
      sub.process = p_par(sub.process, par->right);
      out = std::move(sub);
      return true;
    }
    if (abstract_payload(par->right, bound, hole, sub)) {
      sub.process = p_par(par->left, sub.process);
      out = std::move(sub);
      return true;
    }
    return false;
  }
  return false;
}

std::string verdict_signature(const CheckResult& r) {
  return r.ok() ? "ok " + typing_string(*r.typing) : std::string("rejected");
}

}  // namespace

std::vector<PropertyResult> verify_lemma_properties(const Sorting& gamma,
                                                    const std::string& subject,
                                                    const ProcPtr& p) {
  std::vector<PropertyResult> out;
  auto base = type_check(gamma, p);
  if (!base.ok()) {
    out.push_back({"lemma", subject, false,
                   "baseline does not type-check: " + base.error->kind});
    return out;
  }
  const std::string base_typing = typing_string(*base.typing);

  {
    Typing weak = *base.typing;
    weak[Channel{"s_lemma_probe", "rP"}] = l_end();
    auto r = type_check_with(gamma, weak, p);
    out.push_back({"lemma-typing-weakening", subject, r.ok(),
                   r.ok() ? "fresh ended entry absorbed"
                          : r.error->kind + ": " + r.error->detail});
  }
  Sorting widened = gamma;
  widened.var_sorts["x_lemma_probe"] = Sort::Nat;
  widened.proc_sigs["X_lemma_probe"] = ProcSig{{Sort::Nat}};
  {
    auto r = type_check(widened, p);
    bool pass = r.ok() && typing_string(*r.typing) == base_typing;
    out.push_back({"lemma-sorting-weakening", subject, pass,
                   pass ? "unused variable and signature are inert"
                        : "verdict changed under a widened sorting"});
  }
  {
    auto r = type_check(gamma, p);
    bool pass = r.ok() && typing_string(*r.typing) == base_typing;
    out.push_back({"lemma-sorting-strengthening", subject, pass,
                   pass ? "stripping the unused additions restores the judgement"
                        : "verdict changed after stripping"});
  }
  {
    const Name hole = "x_subst_probe";
    std::set<Name> bound;
    for (const auto& [var, sort] : gamma.var_sorts) {
      (void)sort;
      bound.insert(var);
    }
    Abstraction abs;
    if (!abstract_payload(p, bound, hole, abs)) {
      out.push_back({"lemma-substitution", subject, true, "no abstractable payload; vacuous"});
    } else {
      Sorting extended = gamma;
      extended.var_sorts[hole] = abs.sort;
      auto r_abs = type_check(extended, abs.process);
      if (!r_abs.ok() && abs.sort == Sort::Nat) {
        extended.var_sorts[hole] = Sort::Int;
        r_abs = type_check(extended, abs.process);
      }
      ProcPtr back = substitute(abs.process, Subst{{hole, abs.original}});
      bool pass = r_abs.ok() && typing_string(*r_abs.typing) == base_typing &&
                  struct_equal(back, p) && type_check(gamma, back).ok();
      out.push_back({"lemma-substitution", subject, pass,
                     "payload " + show_value(abs.original) + " of arm " + abs.site +
                         (pass ? " abstracts and substitutes back to the same judgement"
                               : " breaks the judgement")});
    }
  }
  return out;
}

namespace {

using Rewrite = std::pair<std::string, ProcPtr>;

struct RewriteGen {
  std::set<Name> used;
  int counter = 0;

  Name fresh() {
    Name z;
    do {
      z = "zc" + std::to_string(counter++);
    } while (used.count(z));
    return z;
  }

  std::vector<Rewrite> of(const ProcPtr& p) {
    std::vector<Rewrite> out;
    out.push_back({"par-unit", p_par(p, p_nil())});
    if (const auto* par = std::get_if<PPar>(&p->node)) {
      out.push_back({"par-comm", p_par(par->right, par->left)});
      if (const auto* lp = std::get_if<PPar>(&par->left->node))
        out.push_back({"par-assoc", p_par(lp->left, p_par(lp->right, par->right))});
      if (const auto* rp = std::get_if<PPar>(&par->right->node))
        out.push_back({"par-assoc", p_par(p_par(par->left, rp->left), rp->right)});
      if (is_nil(par->right)) out.push_back({"par-unit", par->left});
      if (is_nil(par->left)) out.push_back({"par-unit", par->right});
      if (const auto* lr = std::get_if<PRestrict>(&par->left->node)) {
        if (!all_names(par->right).count(lr->session))
          out.push_back({"scope-extrusion",
                         p_restrict(lr->session, p_par(lr->body, par->right), lr->annotation)});
      }
      if (const auto* rr = std::get_if<PRestrict>(&par->right->node)) {
        if (!all_names(par->left).count(rr->session))
          out.push_back({"scope-extrusion",
                         p_restrict(rr->session, p_par(par->left, rr->body), rr->annotation)});
      }
      if (const auto* ld = std::get_if<PDef>(&par->left->node)) {
        auto br = binder_report(par->right);
        if (!br.free_proc_vars.count(ld->name) && !br.declared_proc_vars.count(ld->name))
          out.push_back({"def-extrusion", p_def(ld->name, ld->params, ld->body,
                                                p_par(ld->scope, par->right))});
      }
      for (auto& [axiom, q] : of(par->left)) out.push_back({axiom, p_par(q, par->right)});
      for (auto& [axiom, q] : of(par->right)) out.push_back({axiom, p_par(par->left, q)});
      return out;
    }
    if (const auto* res = std::get_if<PRestrict>(&p->node)) {
      {
        Name z = fresh();
        try {
          ProcPtr renamed = substitute(res->body, Subst{{res->session, Channel{z, std::nullopt}}});
          out.push_back({"alpha-restriction", p_restrict(z, renamed, res->annotation)});
        } catch (const SubstError&) {
          // an occurrence form the renaming cannot inhabit; skip the instance
        }
      }
      if (const auto* inner = std::get_if<PRestrict>(&res->body->node)) {
        if (inner->session != res->session)
          out.push_back(
              {"restriction-swap",
               p_restrict(inner->session,
                          p_restrict(res->session, inner->body, res->annotation),
                          inner->annotation)});
      }
      if (const auto* par = std::get_if<PPar>(&res->body->node)) {
        if (!all_names(par->right).count(res->session))
          out.push_back({"scope-extrusion",
                         p_par(p_restrict(res->session, par->left, res->annotation), par->right)});
        if (!all_names(par->left).count(res->session))
          out.push_back({"scope-extrusion",
                         p_par(par->left, p_restrict(res->session, par->right, res->annotation))});
      }
      if (const auto* def = std::get_if<PDef>(&res->body->node)) {
        if (!all_names(def->body).count(res->session))
          out.push_back({"restriction-def-swap",
                         p_def(def->name, def->params, def->body,
                               p_restrict(res->session, def->scope, res->annotation))});
      }
      if (!res->annotation && !all_names(res->body).count(res->session))
        out.push_back({"restriction-gc", res->body});
      for (auto& [axiom, q] : of(res->body))
        out.push_back({axiom, p_restrict(res->session, q, res->annotation)});
      return out;
    }
    if (const auto* def = std::get_if<PDef>(&p->node)) {
      if (const auto* inner = std::get_if<PDef>(&def->scope->node)) {
        auto inner_br = binder_report(inner->body);
        auto outer_br = binder_report(def->body);
        bool entangled = inner->name == def->name ||
                         inner_br.free_proc_vars.count(def->name) ||
                         inner_br.declared_proc_vars.count(def->name) ||
                         outer_br.free_proc_vars.count(inner->name) ||
                         outer_br.declared_proc_vars.count(inner->name);
        if (!entangled)
          out.push_back({"def-swap",
                         p_def(inner->name, inner->params, inner->body,
                               p_def(def->name, def->params, def->body, inner->scope))});
      }
      if (const auto* res = std::get_if<PRestrict>(&def->scope->node)) {
        if (!all_names(def->body).count(res->session))
          out.push_back({"restriction-def-swap",
                         p_restrict(res->session,
                                    p_def(def->name, def->params, def->body, res->body),
                                    res->annotation)});
      }
      for (auto& [axiom, q] : of(def->body))
        out.push_back({axiom, p_def(def->name, def->params, q, def->scope)});
      for (auto& [axiom, q] : of(def->scope))
        out.push_back({axiom, p_def(def->name, def->params, def->body, q)});
      return out;
    }
    if (const auto* sel = std::get_if<PSelect>(&p->node)) {
      for (std::size_t i = 0; i < sel->arms.size(); ++i) {
        for (auto& [axiom, q] : of(sel->arms[i].cont)) {
          auto arms = sel->arms;
          arms[i].cont = q;
          out.push_back({axiom, p_select(sel->chan, sel->partner, std::move(arms))});
        }
      }
      return out;
    }
    if (const auto* bra = std::get_if<PBranch>(&p->node)) {
      for (std::size_t i = 0; i < bra->arms.size(); ++i) {
        for (auto& [axiom, q] : of(bra->arms[i].cont)) {
          auto arms = bra->arms;
          arms[i].cont = q;
          out.push_back({axiom, p_branch(bra->chan, bra->partner, std::move(arms))});
        }
      }
      return out;
    }
    return out;
  }
};

}  // namespace

std::vector<std::pair<std::string, ProcPtr>> congruence_rewrites(const ProcPtr& p) {
  RewriteGen gen;
  gen.used = all_names(p);
  return gen.of(p);
}

std::vector<PropertyResult> verify_congruence_invariance(const Sorting& gamma,
                                                         const std::string& subject,
                                                         const ProcPtr& p) {
  auto base = verdict_signature(type_check(gamma, p));
  int checked = 0;
  std::vector<std::string> failures;
  for (const auto& [axiom, q] : congruence_rewrites(p)) {
    ++checked;
    if (!congruent(p, q)) {
      failures.push_back(axiom + ": rewrite left the congruence class");
      continue;
    }
    auto sig = verdict_signature(type_check(gamma, q));
    if (sig != base)
      failures.push_back(axiom + ": verdict changed from '" + base + "' to '" + sig + "'");
  }
  std::string detail = std::to_string(checked) + " rewrites against '" + base + "'";
  if (!failures.empty()) detail += "; first failure: " + failures.front();
  return {PropertyResult{"congruence-invariance", subject, failures.empty(), detail}};
}

std::vector<PropertyResult> verify_intersection(const Sorting& gamma, const std::string& subject,
                                                const ProcPtr& open, const Typing& a,
                                                const Typing& b) {
  std::vector<PropertyResult> out;
  bool erasure = a.size() == b.size();
  if (erasure) {
    for (const auto& [chan, ta] : a) {
      auto it = b.find(chan);
      if (it == b.end() || !erased_type_equal(ta, it->second)) {
        erasure = false;
        break;
      }
    }
  }
  out.push_back({"intersection-erasure", subject, erasure,
                 erasure ? "expectations share one erased shape" : "erasures differ"});
  auto ra = type_check_with(gamma, a, open);
  auto rb = type_check_with(gamma, b, open);
  bool both = ra.ok() && rb.ok();
  out.push_back({"intersection-operands", subject, both,
                 both ? "both expectations admit the process"
                      : "an operand expectation rejects the process"});
  auto meet = intersect_typing(a, b);
  if (meet.undefined) {
    out.push_back({"intersection-meet", subject, false,
                   "meet undefined: " + meet.undefined->kind + ": " + meet.undefined->detail});
    return out;
  }
  auto rm = type_check_with(gamma, meet.typing, open);
  out.push_back({"intersection-meet", subject, rm.ok(),
                 rm.ok() ? "process re-checks under the meet"
                         : rm.error->kind + ": " + rm.error->detail});
  return out;
}

bool VerifyReport::all_pass() const {
  for (const auto& row : rows)
    if (!row.pass) return false;
  return true;
}

namespace {

std::string slurp_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

VerifyReport verify_corpus(const std::string& fixtures_dir) {
  VerifyReport rep;
  namespace fs = std::filesystem;

  // Pinned checker verdicts: the corpus is part of the tool's contract.
  const std::map<std::string, std::string> pinned = {
      {"system_simple.mps", "ok"},
      {"com2_typed.mps", "ok"},
      {"system_quit95.mps", "ProbOutsideInterval"},
      {"deadlock_demo.mps", "MissingAnnotation"},
      {"call1.mps", "UnboundChannel"},
      {"com2.mps", "UnboundChannel"},
      {"system_full.mps", "MissingAnnotation"},
  };

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(fixtures_dir))
    if (entry.path().extension() == ".mps") names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());

  ParseOptions popts;
  popts.base_dir = fixtures_dir;

  std::map<std::string, ProcPtr> parsed;
  for (const auto& name : names) {
    ProcPtr p;
    try {
      p = parse_process(slurp_file(fs::path(fixtures_dir) / name), popts);
    } catch (const std::exception& ex) {
      rep.rows.push_back({"parse", name, false, ex.what()});
      continue;
    }
    parsed[name] = p;
    auto chk = type_check({}, p);

    if (auto it = pinned.find(name); it != pinned.end()) {
      std::string actual = chk.ok() ? "ok" : chk.error->kind;
      rep.rows.push_back({"verdict", name, actual == it->second,
                          "expected " + it->second + ", got " + actual});
    }
    {
      auto again = type_check({}, p);
      bool same = chk.ok() == again.ok() &&
                  (chk.ok() ? typing_string(*chk.typing) == typing_string(*again.typing)
                            : chk.error->kind == again.error->kind &&
                                  chk.error->detail == again.error->detail);
      rep.rows.push_back({"determinism", name, same,
                          same ? "re-run agrees bit for bit" : "re-run disagrees"});
    }
    for (auto& row : verify_congruence_invariance({}, name, p)) rep.rows.push_back(row);

    if (chk.ok()) {
      int depth = name == "system_simple.mps" ? 5 : 4;
      auto sr = verify_subject_reduction({}, p, depth);
      {
        std::string detail = "depth " + std::to_string(depth) + ": " +
                             std::to_string(sr.states) + " states, " +
                             std::to_string(sr.transitions) + " transitions";
        if (!sr.applicable) detail = sr.reason;
        if (!sr.violations.empty())
          detail += "; first violation: " + sr.violations.front().detail;
        rep.rows.push_back({"preservation", name, sr.ok(), detail});
      }
      auto df = check_deadlock_freedom(p, 64);
      {
        bool pass = df.verdict == DFVerdict::DeadlockFree;
        std::string detail;
        switch (df.verdict) {
          case DFVerdict::DeadlockFree:
            detail = "exhaustive over " + std::to_string(df.states) + " states";
            break;
          case DFVerdict::NotApplicable:
            pass = true;  // hypothesis unmet, vacuous for a typed fixture
            detail = "not applicable: " + df.reason;
            break;
          case DFVerdict::Inconclusive:
            detail = df.reason;
            break;
          case DFVerdict::Violation:
            detail = "stuck non-inaction state: " + df.stuck_non_nil.front().state;
            break;
        }
        rep.rows.push_back({"deadlock-freedom", name, pass, detail});
      }
      for (auto& row : verify_lemma_properties({}, name, p)) rep.rows.push_back(row);
      {
        bool sum_ok = true;
        std::string detail = "k = 1..6 all sum to 1";
        for (int k = 1; k <= 6 && sum_ok; ++k) {
          auto total = total_probability(p, k);
          if (!total.has_value()) {
            detail = "distribution empty from k = " + std::to_string(k) + "; vacuous beyond";
            break;
          }
          if (*total != 1) {
            sum_ok = false;
            detail = "k = " + std::to_string(k) + " sums to " + rational_string(*total);
          }
        }
        rep.rows.push_back({"step-sum", name, sum_ok, detail});
      }
    } else if (name == "deadlock_demo.mps") {
      auto search = find_stuck_states(p, 16);
      bool found = !search.stuck_non_nil.empty();
      rep.rows.push_back({"stuck-demo", name, found,
                          found ? "stuck non-inaction state exhibited: " +
                                      search.stuck_non_nil.front().state
                                : "no stuck non-inaction state found"});
    }
  }

  // Intersection suite over the interval-variant annotations.
  if (parsed.count("system_simple.mps")) {
    try {
      OpenSystem sys = peel_annotated(parsed.at("system_simple.mps"));
      auto expect_for = [&](const std::string& gty) {
        auto g = parse_global_type(slurp_file(fs::path(fixtures_dir) / gty));
        Typing e;
        for (const auto& role : roles_of(g)) e[Channel{"s", role}] = project(g, role);
        return e;
      };
      Typing e_lo = expect_for("ga_quitlow.gty");
      Typing e_mid = expect_for("ga_quitmid.gty");
      Typing e_bad = expect_for("ga_unreachable.gty");
      for (auto& row : verify_intersection({}, "system_simple open body", sys.open, e_lo, e_mid))
        rep.rows.push_back(row);
      auto disjoint = intersect_typing(e_lo, e_bad);
      bool rejected = disjoint.undefined && disjoint.undefined->kind == "empty-interval";
      rep.rows.push_back({"intersection-disjoint", "quitlow vs unreachable variant", rejected,
                          rejected ? "meet rejected: " + disjoint.undefined->detail
                                   : "disjoint intervals were not rejected"});
    } catch (const std::exception& ex) {
      rep.rows.push_back({"intersection-meet", "system_simple open body", false, ex.what()});
    }
  }
  return rep;
}

}  // namespace mpst

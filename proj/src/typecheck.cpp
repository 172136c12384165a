#include "mpst/typecheck.hpp"

#include "mpst/print.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

namespace mpst {

std::vector<Sort> ProcSig::sorts() const {
  std::vector<Sort> out;
  for (const auto& p : params)
    if (const auto* s = std::get_if<Sort>(&p)) out.push_back(*s);
  return out;
}

std::vector<LocalPtr> ProcSig::chan_types() const {
  std::vector<LocalPtr> out;
  for (const auto& p : params)
    if (const auto* t = std::get_if<LocalPtr>(&p)) out.push_back(*t);
  return out;
}

namespace {

struct DefCell;
using CellPtr = std::shared_ptr<DefCell>;

// Lexical environment of the judgement: value variables with their sorts and
// the definitions in scope (innermost last).
struct DeclEnv {
  std::map<Name, Sort> vars;
  std::vector<CellPtr> defs;
};

// A definition's signature is not written in the syntax; it is fixed by the
// first call reached in checking order, after which the body is checked once
// and every call (including recursive ones) is validated against it.
struct DefCell {
  Name name;
  std::vector<Name> params;
  ProcPtr body;
  DeclEnv env;  // environment at the declaration, including this cell
  bool resolved = false;
  bool body_checked = false;
  ProcSig sig;
};

struct Ctx {
  const Sorting* globals;
  CheckMode mode;
  std::optional<TypeError> error;
  std::vector<CheckWarning> warnings;
  std::vector<std::string> path;
  int fresh_counter = 0;

  void fail(std::string kind, std::string detail) {
    if (!error) error = TypeError{std::move(kind), std::move(detail), path};
  }
  bool failed() const { return error.has_value(); }
};

struct PathGuard {
  Ctx& ctx;
  PathGuard(Ctx& c, std::string frame) : ctx(c) { ctx.path.push_back(std::move(frame)); }
  ~PathGuard() { ctx.path.pop_back(); }
};

bool end_only_type(const LocalPtr& t) { return type_equal(t, l_end()); }

std::string value_shown(const Value& v) {
  if (const auto* s = std::get_if<SessionRef>(&v)) return s->name;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* n = std::get_if<std::int64_t>(&v)) return std::to_string(*n);
  return std::get<StrVal>(v).text;
}

void check_value(Ctx& ctx, const DeclEnv& env, const Value& v, Sort expected) {
  if (ctx.failed()) return;
  if (std::holds_alternative<SessionRef>(v)) {
    ctx.fail("SortMismatch", "session name " + value_shown(v) +
                                 " in value position; session names have no sort");
    return;
  }
  if (std::holds_alternative<bool>(v)) {
    if (expected != Sort::Bool)
      ctx.fail("SortMismatch",
               value_shown(v) + " is bool, expected " + sort_name(expected));
    return;
  }
  if (const auto* n = std::get_if<std::int64_t>(&v)) {
    if (expected == Sort::Int || (expected == Sort::Nat && *n >= 0)) return;
    ctx.fail("SortMismatch",
             value_shown(v) + " does not have sort " + sort_name(expected));
    return;
  }
  const auto& sv = std::get<StrVal>(v);
  auto it = env.vars.find(sv.text);
  if (it != env.vars.end()) {
    if (it->second != expected)
      ctx.fail("SortMismatch", "variable " + sv.text + " has sort " + sort_name(it->second) +
                                   ", expected " + sort_name(expected));
    return;
  }
  if (expected != Sort::Str)
    ctx.fail("SortMismatch",
             "string literal " + sv.text + " where " + sort_name(expected) + " is expected");
}

void check(Ctx& ctx, const ProcPtr& p, Typing delta, DeclEnv env);

void check_body(Ctx& ctx, const CellPtr& cell) {
  if (cell->body_checked || ctx.failed()) return;
  cell->body_checked = true;
  PathGuard g(ctx, "body of " + cell->name);
  DeclEnv env = cell->env;
  Typing delta;
  for (std::size_t i = 0; i < cell->params.size(); ++i) {
    if (const auto* s = std::get_if<Sort>(&cell->sig.params[i])) {
      env.vars[cell->params[i]] = *s;
    } else {
      delta[Channel{cell->params[i], std::nullopt}] = std::get<LocalPtr>(cell->sig.params[i]);
    }
  }
  check(ctx, cell->body, std::move(delta), std::move(env));
}

void infer_signature(Ctx& ctx, const CellPtr& cell, const PCall& call, const Typing& delta,
                     const DeclEnv& env) {
  if (cell->params.size() != call.args.size()) {
    ctx.fail("ArityMismatch", "call of " + cell->name + " passes " +
                                  std::to_string(call.args.size()) + " arguments but " +
                                  cell->name + " takes " + std::to_string(cell->params.size()));
    return;
  }
  ProcSig sig;
  for (const auto& arg : call.args) {
    if (const auto* v = std::get_if<Value>(&arg)) {
      if (std::holds_alternative<SessionRef>(*v)) {
        ctx.fail("SortMismatch", "session name " + value_shown(*v) +
                                     " as argument; session names have no sort");
        return;
      }
      if (std::holds_alternative<bool>(*v)) {
        sig.params.emplace_back(Sort::Bool);
      } else if (const auto* n = std::get_if<std::int64_t>(v)) {
        sig.params.emplace_back(*n >= 0 ? Sort::Nat : Sort::Int);
      } else {
        const auto& sv = std::get<StrVal>(*v);
        auto it = env.vars.find(sv.text);
        sig.params.emplace_back(it != env.vars.end() ? it->second : Sort::Str);
      }
      continue;
    }
    const auto& ch = std::get<Channel>(arg);
    if (!ch.role) {
      auto vit = env.vars.find(ch.name);
      if (vit != env.vars.end()) {
        sig.params.emplace_back(vit->second);
        continue;
      }
    }
    auto dit = delta.find(ch);
    if (dit == delta.end()) {
      ctx.fail("UnboundChannel", "argument " + ch.display() +
                                     " is neither a sorted variable nor a typed channel");
      return;
    }
    sig.params.emplace_back(dit->second);
  }
  cell->sig = std::move(sig);
  cell->resolved = true;
  check_body(ctx, cell);
}

void check_call(Ctx& ctx, const PCall& call, const Typing& delta, const DeclEnv& env) {
  PathGuard g(ctx, "call " + call.name);
  const ProcSig* sig = nullptr;
  for (auto it = env.defs.rbegin(); it != env.defs.rend(); ++it) {
    if ((*it)->name == call.name) {
      if (!(*it)->resolved) {
        infer_signature(ctx, *it, call, delta, env);
        if (ctx.failed()) return;
      }
      sig = &(*it)->sig;
      break;
    }
  }
  if (sig == nullptr) {
    auto git = ctx.globals->proc_sigs.find(call.name);
    if (git == ctx.globals->proc_sigs.end()) {
      ctx.fail("UnknownProcVar", "process variable " + call.name + " is not declared");
      return;
    }
    sig = &git->second;
  }
  if (sig->params.size() != call.args.size()) {
    ctx.fail("ArityMismatch", "call of " + call.name + " passes " +
                                  std::to_string(call.args.size()) + " arguments but " +
                                  call.name + " takes " + std::to_string(sig->params.size()));
    return;
  }
  std::set<Channel> passed;
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    const auto& arg = call.args[i];
    if (const auto* s = std::get_if<Sort>(&sig->params[i])) {
      if (const auto* v = std::get_if<Value>(&arg)) {
        check_value(ctx, env, *v, *s);
      } else {
        const auto& ch = std::get<Channel>(arg);
        auto vit = ch.role ? env.vars.end() : env.vars.find(ch.name);
        if (vit == env.vars.end()) {
          ctx.fail("SortMismatch", "argument " + ch.display() + " of call " + call.name +
                                       " should be a value of sort " + sort_name(*s));
        } else if (vit->second != *s) {
          ctx.fail("SortMismatch", "variable " + ch.name + " has sort " +
                                       sort_name(vit->second) + ", expected " + sort_name(*s));
        }
      }
      if (ctx.failed()) return;
      continue;
    }
    const auto& want = std::get<LocalPtr>(sig->params[i]);
    const auto* ch = std::get_if<Channel>(&arg);
    if (ch == nullptr) {
      ctx.fail("ChannelTypeMismatch",
               "argument " + std::to_string(i + 1) + " of call " + call.name +
                   " should be a channel, got value " + value_shown(std::get<Value>(arg)));
      return;
    }
    if (passed.count(*ch) != 0) {
      ctx.fail("NonDisjointTyping",
               "channel " + ch->display() + " passed twice to call " + call.name);
      return;
    }
    auto dit = delta.find(*ch);
    if (dit == delta.end()) {
      ctx.fail("UnboundChannel",
               "no typing entry for channel argument " + ch->display());
      return;
    }
    if (!type_equal(dit->second, want)) {
      ctx.fail("ChannelTypeMismatch", "channel " + ch->display() + " has type " +
                                          pretty_print(dit->second) +
                                          " but the definition requires " + pretty_print(want));
      return;
    }
    passed.insert(*ch);
  }
  for (const auto& [chan, t] : delta) {
    if (passed.count(chan) != 0) continue;
    if (!end_only_type(t)) {
      ctx.fail("ResidualNotEndOnly", "after call " + call.name + ", channel " + chan.display() +
                                         " still requires " + pretty_print(t));
      return;
    }
  }
}

void check(Ctx& ctx, const ProcPtr& p, Typing delta, DeclEnv env) {
  if (ctx.failed()) return;
  if (std::holds_alternative<PNil>(p->node)) {
    for (const auto& [chan, t] : delta) {
      if (!end_only_type(t)) {
        ctx.fail("ResidualNotEndOnly",
                 "channel " + chan.display() + " still requires " + pretty_print(t));
        return;
      }
    }
    return;
  }
  if (const auto* sel = std::get_if<PSelect>(&p->node)) {
    PathGuard g(ctx, "select " + sel->chan.display() + " towards " + sel->partner);
    auto it = delta.find(sel->chan);
    if (it == delta.end()) {
      ctx.fail("UnboundChannel", "no typing entry for " + sel->chan.display());
      return;
    }
    LocalPtr head = unfold_head(it->second);
    const auto* st = std::get_if<LSelect>(&head->node);
    if (st == nullptr) {
      ctx.fail("UsageMismatch",
               "process selects on " + sel->chan.display() + " but its type is " +
                   pretty_print(head));
      return;
    }
    if (st->partner != sel->partner) {
      ctx.fail("UsageMismatch", "selection towards " + sel->partner +
                                    " but the type communicates with " + st->partner);
      return;
    }
    std::set<Name> labels_j;
    for (const auto& arm : sel->arms) labels_j.insert(arm.label);
    std::set<Name> labels_i;
    for (const auto& arm : st->arms) labels_i.insert(arm.label);
    for (const auto& l : labels_j) {
      if (labels_i.count(l) == 0) {
        ctx.fail("LabelSetMismatch",
                 "label " + l + " does not appear in the selection type");
        return;
      }
    }
    if (ctx.mode == CheckMode::Strict && labels_j != labels_i) {
      for (const auto& l : labels_i) {
        if (labels_j.count(l) == 0) {
          ctx.fail("LabelSetMismatch",
                   "strict mode requires every label of the type; missing " + l);
          return;
        }
      }
    }
    if (ctx.mode == CheckMode::Subset) {
      for (const auto& arm : st->arms) {
        if (labels_j.count(arm.label) == 0 && !arm.delta.contains(0)) {
          ctx.fail("ProbOutsideInterval", "omitted label " + arm.label +
                                              ": probability 0 outside " +
                                              interval_string(arm.delta));
          return;
        }
      }
    }
    Rational sum = 0;
    for (const auto& arm : sel->arms) sum += arm.prob;
    if (sum != 1) {
      ctx.fail("ProbSumNotOne", "branch probabilities at " + sel->chan.display() +
                                    " sum to " + rational_string(sum));
      return;
    }
    for (const auto& arm : sel->arms) {
      const SelectArm* ta = nullptr;
      for (const auto& cand : st->arms) {
        if (cand.label == arm.label) {
          ta = &cand;
          break;
        }
      }
      if (!ta->delta.contains(arm.prob)) {
        ctx.fail("ProbOutsideInterval", "label " + arm.label + ": probability " +
                                            rational_string(arm.prob) + " outside " +
                                            interval_string(ta->delta));
        return;
      }
      check_value(ctx, env, arm.payload, ta->sort);
      if (ctx.failed()) return;
      PathGuard ga(ctx, "arm " + arm.label);
      Typing next = delta;
      next[sel->chan] = ta->cont;
      check(ctx, arm.cont, std::move(next), env);
      if (ctx.failed()) return;
    }
    return;
  }
  if (const auto* br = std::get_if<PBranch>(&p->node)) {
    PathGuard g(ctx, "branch " + br->chan.display() + " from " + br->partner);
    auto it = delta.find(br->chan);
    if (it == delta.end()) {
      ctx.fail("UnboundChannel", "no typing entry for " + br->chan.display());
      return;
    }
    LocalPtr head = unfold_head(it->second);
    const auto* bt = std::get_if<LBranch>(&head->node);
    if (bt == nullptr) {
      ctx.fail("UsageMismatch", "process branches on " + br->chan.display() +
                                    " but its type is " + pretty_print(head));
      return;
    }
    if (bt->partner != br->partner) {
      ctx.fail("UsageMismatch", "branching from " + br->partner +
                                    " but the type communicates with " + bt->partner);
      return;
    }
    std::set<Name> offered;
    for (const auto& arm : br->arms) offered.insert(arm.label);
    std::set<Name> expected;
    for (const auto& arm : bt->arms) expected.insert(arm.label);
    if (offered != expected) {
      std::ostringstream os;
      os << "branching must offer exactly the labels of its type;";
      for (const auto& l : expected)
        if (offered.count(l) == 0) os << " missing " << l;
      for (const auto& l : offered)
        if (expected.count(l) == 0) os << " extra " << l;
      ctx.fail("LabelSetMismatch", os.str());
      return;
    }
    for (const auto& arm : br->arms) {
      const BranchArm* ta = nullptr;
      for (const auto& cand : bt->arms) {
        if (cand.label == arm.label) {
          ta = &cand;
          break;
        }
      }
      PathGuard ga(ctx, "arm " + arm.label);
      DeclEnv benv = env;
      benv.vars[arm.binder] = ta->sort;
      Typing next = delta;
      next[br->chan] = ta->cont;
      check(ctx, arm.cont, std::move(next), std::move(benv));
      if (ctx.failed()) return;
    }
    return;
  }
  if (const auto* par = std::get_if<PPar>(&p->node)) {
    PathGuard g(ctx, "parallel");
    auto fcl = binder_report(par->left).free_channels;
    auto fcr = binder_report(par->right).free_channels;
    Typing dl, dr;
    for (const auto& [chan, t] : delta) {
      bool inl = fcl.count(chan) != 0;
      bool inr = fcr.count(chan) != 0;
      if (inl && inr) {
        ctx.fail("NonDisjointTyping",
                 "channel " + chan.display() + " is used by both parallel components");
        return;
      }
      (inr ? dr : dl)[chan] = t;  // unused entries stay with the left component
    }
    check(ctx, par->left, std::move(dl), env);
    check(ctx, par->right, std::move(dr), std::move(env));
    return;
  }
  if (const auto* res = std::get_if<PRestrict>(&p->node)) {
    if (!res->annotation) {
      ctx.fail("MissingAnnotation",
               "new " + res->session + " carries no protocol annotation");
      return;
    }
    PathGuard g(ctx, "restrict " + res->session);
    WfReport wf = well_formed(res->annotation);
    if (!wf.undefined.empty()) {
      const auto& [role, reason] = *wf.undefined.begin();
      ctx.fail("ProjectionMismatch",
               "annotation of new " + res->session + ": role " + role + ": " + reason);
      return;
    }
    for (const auto& bad : wf.bad_interval_sets) {
      ctx.warnings.push_back(
          {"unreachable-interval-set",
           "annotation of new " + res->session + ": interval set " + bad.shown + " at " +
               bad.path + (bad.proper ? " is proper but not reachable" : " is not proper")});
    }
    Name session = res->session;
    ProcPtr body = res->body;
    bool clash = false;
    for (const auto& [chan, t] : delta) clash = clash || chan.name == session;
    if (clash) {
      std::set<Name> avoid = all_names(body);
      for (const auto& [chan, t] : delta) avoid.insert(chan.name);
      Name fresh;
      do {
        fresh = session + "_" + std::to_string(ctx.fresh_counter++);
      } while (avoid.count(fresh) != 0);
      body = substitute(body, {{session, Channel{fresh, std::nullopt}}});
      session = fresh;
    }
    Typing next = std::move(delta);
    for (const auto& [role, t] : wf.projections) next[Channel{session, role}] = t;
    check(ctx, body, std::move(next), std::move(env));
    return;
  }
  if (const auto* def = std::get_if<PDef>(&p->node)) {
    auto cell = std::make_shared<DefCell>();
    cell->name = def->name;
    cell->params = def->params;
    cell->body = def->body;
    DeclEnv inner = env;
    inner.defs.push_back(cell);
    cell->env = inner;
    PathGuard g(ctx, "def " + def->name);
    check(ctx, def->scope, std::move(delta), std::move(inner));
    if (ctx.failed()) return;
    if (!cell->resolved) {
      if (!cell->params.empty()) {
        ctx.fail("CannotInferSignature",
                 "definition " + cell->name +
                     " is never called; its parameter types cannot be determined");
        return;
      }
      cell->resolved = true;
      check_body(ctx, cell);
    }
    return;
  }
  const auto& call = std::get<PCall>(p->node);
  check_call(ctx, call, delta, env);
}

CheckResult run_check(const Sorting& gamma, const Typing& expect, const ProcPtr& p,
                      CheckMode mode) {
  Ctx ctx{&gamma, mode, std::nullopt, {}, {}, 0};
  DeclEnv env;
  env.vars = gamma.var_sorts;
  check(ctx, p, expect, std::move(env));
  CheckResult res;
  res.warnings = std::move(ctx.warnings);
  if (ctx.error) {
    res.error = std::move(ctx.error);
    return res;
  }
  res.typing = expect;
  return res;
}

}  // namespace

CheckResult type_check(const Sorting& gamma, const ProcPtr& p, CheckMode mode) {
  return run_check(gamma, {}, p, mode);
}

CheckResult type_check_with(const Sorting& gamma, const Typing& expect, const ProcPtr& p,
                            CheckMode mode) {
  return run_check(gamma, expect, p, mode);
}

std::vector<TypeStep> type_step(const Typing& delta, const TransitionLabel& label) {
  std::vector<TypeStep> out;
  const auto* comm = std::get_if<CommLabel>(&label);
  if (comm == nullptr) return out;
  for (const auto& [chan, t] : delta) {
    if (!chan.role || *chan.role != comm->from) continue;
    auto partner = delta.find(Channel{chan.name, comm->to});
    if (partner == delta.end()) continue;
    LocalPtr h1 = unfold_head(t);
    LocalPtr h2 = unfold_head(partner->second);
    const auto* st = std::get_if<LSelect>(&h1->node);
    const auto* bt = std::get_if<LBranch>(&h2->node);
    if (st == nullptr || bt == nullptr) continue;
    if (st->partner != comm->to || bt->partner != comm->from) continue;
    const SelectArm* sa = nullptr;
    for (const auto& arm : st->arms)
      if (arm.label == comm->label) sa = &arm;
    const BranchArm* ba = nullptr;
    for (const auto& arm : bt->arms)
      if (arm.label == comm->label) ba = &arm;
    if (sa == nullptr || ba == nullptr || sa->sort != ba->sort) continue;
    Typing next = delta;
    next[chan] = sa->cont;
    next[partner->first] = ba->cont;
    out.push_back({label, sa->delta, std::move(next)});
  }
  return out;
}

std::string typing_string(const Typing& delta) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [chan, t] : delta) {
    os << (first ? " " : ", ") << chan.display() << ": " << pretty_print(t);
    first = false;
  }
  os << (first ? "}" : " }");
  return os.str();
}

}  // namespace mpst

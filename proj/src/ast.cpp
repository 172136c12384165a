#include "mpst/ast.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace mpst {

ProcPtr p_select(Channel chan, Name partner, std::vector<SelectArmP> arms) {
  return std::make_shared<Process>(
      Process{PSelect{std::move(chan), std::move(partner), std::move(arms)}});
}
ProcPtr p_branch(Channel chan, Name partner, std::vector<BranchArmP> arms) {
  return std::make_shared<Process>(
      Process{PBranch{std::move(chan), std::move(partner), std::move(arms)}});
}
ProcPtr p_restrict(Name session, ProcPtr body, GlobalPtr annotation) {
  return std::make_shared<Process>(
      Process{PRestrict{std::move(session), std::move(annotation), std::move(body)}});
}
ProcPtr p_def(Name name, std::vector<Name> params, ProcPtr body, ProcPtr scope) {
  return std::make_shared<Process>(Process{
      PDef{std::move(name), std::move(params), std::move(body), std::move(scope)}});
}
ProcPtr p_call(Name name, std::vector<CallArg> args) {
  return std::make_shared<Process>(Process{PCall{std::move(name), std::move(args)}});
}
ProcPtr p_nil() {
  static const ProcPtr nil = std::make_shared<Process>(Process{PNil{}});
  return nil;
}
ProcPtr p_par(ProcPtr left, ProcPtr right) {
  return std::make_shared<Process>(Process{PPar{std::move(left), std::move(right)}});
}

bool is_nil(const ProcPtr& p) {
  return std::holds_alternative<PNil>(p->node);
}

namespace {

struct ReportCtx {
  BinderReport& out;
  std::set<Name> bound;       // sessions, variables (unified namespace)
  std::set<Name> bound_proc;  // process variables
};

void report_value(const Value& v, ReportCtx& ctx) {
  if (const auto* s = std::get_if<SessionRef>(&v)) {
    if (!ctx.bound.count(s->name)) ctx.out.free_vars.insert(s->name);
  } else if (const auto* s = std::get_if<StrVal>(&v)) {
    if (!ctx.bound.count(s->text)) ctx.out.free_vars.insert(s->text);
  }
}

void report_channel(const Channel& c, ReportCtx& ctx) {
  if (!ctx.bound.count(c.name)) {
    ctx.out.free_channels.insert(c);
    ctx.out.free_vars.insert(c.name);
  }
}

void report_proc(const ProcPtr& p, ReportCtx ctx);

void report_proc(const ProcPtr& p, ReportCtx ctx) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          report_channel(n.chan, ctx);
          for (const auto& a : n.arms) {
            report_value(a.payload, ctx);
            report_proc(a.cont, ctx);
          }
        } else if constexpr (std::is_same_v<T, PBranch>) {
          report_channel(n.chan, ctx);
          for (const auto& a : n.arms) {
            ReportCtx inner = ctx;
            inner.bound.insert(a.binder);
            report_proc(a.cont, inner);
          }
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          ReportCtx inner = ctx;
          inner.bound.insert(n.session);
          report_proc(n.body, inner);
        } else if constexpr (std::is_same_v<T, PDef>) {
          ctx.out.declared_proc_vars.insert(n.name);
          ReportCtx body_ctx = ctx;
          body_ctx.bound_proc.insert(n.name);
          body_ctx.bound.insert(n.params.begin(), n.params.end());
          report_proc(n.body, body_ctx);
          ReportCtx scope_ctx = ctx;
          scope_ctx.bound_proc.insert(n.name);
          report_proc(n.scope, scope_ctx);
        } else if constexpr (std::is_same_v<T, PCall>) {
          if (!ctx.bound_proc.count(n.name)) ctx.out.free_proc_vars.insert(n.name);
          for (const auto& a : n.args) {
            if (const auto* v = std::get_if<Value>(&a)) {
              report_value(*v, ctx);
            } else {
              report_channel(std::get<Channel>(a), ctx);
            }
          }
        } else if constexpr (std::is_same_v<T, PPar>) {
          report_proc(n.left, ctx);
          report_proc(n.right, ctx);
        }
      },
      p->node);
}

}  // namespace

BinderReport binder_report(const ProcPtr& p) {
  BinderReport out;
  ReportCtx ctx{out, {}, {}};
  report_proc(p, ctx);
  return out;
}

namespace {

void collect_names(const ProcPtr& p, std::set<Name>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        auto value_names = [&](const Value& v) {
          if (const auto* s = std::get_if<SessionRef>(&v)) out.insert(s->name);
          if (const auto* s = std::get_if<StrVal>(&v)) out.insert(s->text);
        };
        if constexpr (std::is_same_v<T, PSelect>) {
          out.insert(n.chan.name);
          if (n.chan.role) out.insert(*n.chan.role);
          out.insert(n.partner);
          for (const auto& a : n.arms) {
            value_names(a.payload);
            collect_names(a.cont, out);
          }
        } else if constexpr (std::is_same_v<T, PBranch>) {
          out.insert(n.chan.name);
          if (n.chan.role) out.insert(*n.chan.role);
          out.insert(n.partner);
          for (const auto& a : n.arms) {
            out.insert(a.binder);
            collect_names(a.cont, out);
          }
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          out.insert(n.session);
          collect_names(n.body, out);
        } else if constexpr (std::is_same_v<T, PDef>) {
          out.insert(n.name);
          out.insert(n.params.begin(), n.params.end());
          collect_names(n.body, out);
          collect_names(n.scope, out);
        } else if constexpr (std::is_same_v<T, PCall>) {
          out.insert(n.name);
          for (const auto& a : n.args) {
            if (const auto* v = std::get_if<Value>(&a)) {
              value_names(*v);
            } else {
              const auto& c = std::get<Channel>(a);
              out.insert(c.name);
              if (c.role) out.insert(*c.role);
            }
          }
        } else if constexpr (std::is_same_v<T, PPar>) {
          collect_names(n.left, out);
          collect_names(n.right, out);
        }
      },
      p->node);
}

}  // namespace

std::set<Name> all_names(const ProcPtr& p) {
  std::set<Name> out;
  collect_names(p, out);
  return out;
}

std::set<Name> free_session_names(const ProcPtr& p) {
  BinderReport r = binder_report(p);
  std::set<Name> out;
  for (const auto& c : r.free_channels) out.insert(c.name);
  for (const auto& v : r.free_vars) out.insert(v);
  return out;
}

namespace {

Name fresh_name(const Name& base, const std::set<Name>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    Name cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

std::set<Name> range_names(const Subst& s) {
  std::set<Name> out;
  for (const auto& [k, rep] : s) {
    (void)k;
    if (const auto* v = std::get_if<Value>(&rep)) {
      if (const auto* sr = std::get_if<SessionRef>(v)) out.insert(sr->name);
      if (const auto* sv = std::get_if<StrVal>(v)) out.insert(sv->text);
    } else {
      out.insert(std::get<Channel>(rep).name);
    }
  }
  return out;
}

Value subst_value(const Value& v, const Subst& s) {
  const Name* occ = nullptr;
  bool is_session_ref = false;
  if (const auto* sr = std::get_if<SessionRef>(&v)) {
    occ = &sr->name;
    is_session_ref = true;
  } else if (const auto* sv = std::get_if<StrVal>(&v)) {
    occ = &sv->text;
  }
  if (!occ) return v;
  auto it = s.find(*occ);
  if (it == s.end()) return v;
  if (const auto* val = std::get_if<Value>(&it->second)) return *val;
  const auto& c = std::get<Channel>(it->second);
  if (c.role) {
    throw SubstError("cannot substitute channel " + c.display() +
                     " into value position");
  }
  // A bare-name channel keeps the occurrence's constructor.
  if (is_session_ref) return SessionRef{c.name};
  return StrVal{c.name};
}

Channel subst_channel(const Channel& c, const Subst& s) {
  auto it = s.find(c.name);
  if (it == s.end()) return c;
  if (const auto* val = std::get_if<Value>(&it->second)) {
    const Name* nm = nullptr;
    if (const auto* sr = std::get_if<SessionRef>(val)) nm = &sr->name;
    if (const auto* sv = std::get_if<StrVal>(val)) nm = &sv->text;
    if (!nm) {
      throw SubstError("cannot substitute literal into channel position");
    }
    return Channel{*nm, c.role};
  }
  const auto& rep = std::get<Channel>(it->second);
  if (!c.role) return rep;
  // Occurrence name[r]: the replacement supplies the session part.
  if (rep.role) {
    throw SubstError("cannot substitute channel " + rep.display() +
                     " into session slot of " + c.display());
  }
  return Channel{rep.name, c.role};
}

ProcPtr subst_proc(const ProcPtr& p, const Subst& s);

// Descends under one binder: drops shadowed entries and renames the binder
// when it would capture a name free in the substitution range.
template <typename Fn>
ProcPtr under_binder(const Name& binder, const Subst& s, const ProcPtr& body,
                     Fn rebuild) {
  Subst active = s;
  active.erase(binder);
  if (active.empty()) return rebuild(binder, body);
  std::set<Name> rng = range_names(active);
  if (!rng.count(binder)) return rebuild(binder, subst_proc(body, active));
  std::set<Name> avoid = rng;
  auto body_names = all_names(body);
  avoid.insert(body_names.begin(), body_names.end());
  for (const auto& [k, v] : active) {
    (void)v;
    avoid.insert(k);
  }
  Name nb = fresh_name(binder, avoid);
  Subst rename;
  rename.emplace(binder, Channel{nb, std::nullopt});
  ProcPtr renamed = subst_proc(body, rename);
  return rebuild(nb, subst_proc(renamed, active));
}

ProcPtr subst_proc(const ProcPtr& p, const Subst& s) {
  if (s.empty()) return p;
  return std::visit(
      [&](const auto& n) -> ProcPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          std::vector<SelectArmP> arms;
          arms.reserve(n.arms.size());
          for (const auto& a : n.arms) {
            arms.push_back(
                SelectArmP{a.prob, a.label, subst_value(a.payload, s), subst_proc(a.cont, s)});
          }
          return p_select(subst_channel(n.chan, s), n.partner, std::move(arms));
        } else if constexpr (std::is_same_v<T, PBranch>) {
          std::vector<BranchArmP> arms;
          arms.reserve(n.arms.size());
          for (const auto& a : n.arms) {
            ProcPtr cont;
            Name binder;
            under_binder(a.binder, s, a.cont, [&](const Name& b, ProcPtr c) {
              binder = b;
              cont = std::move(c);
              return nullptr;
            });
            arms.push_back(BranchArmP{a.label, binder, cont});
          }
          return p_branch(subst_channel(n.chan, s), n.partner, std::move(arms));
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          return under_binder(n.session, s, n.body, [&](const Name& b, ProcPtr body) {
            return p_restrict(b, std::move(body), n.annotation);
          });
        } else if constexpr (std::is_same_v<T, PDef>) {
          // Def name is a process variable; value/channel substitution cannot
          // capture it, but params can shadow and be captured.
          Subst active = s;
          for (const auto& prm : n.params) active.erase(prm);
          ProcPtr scope = subst_proc(n.scope, s);
          if (active.empty()) return p_def(n.name, n.params, n.body, std::move(scope));
          std::set<Name> rng = range_names(active);
          std::vector<Name> params = n.params;
          ProcPtr body = n.body;
          for (auto& prm : params) {
            if (!rng.count(prm)) continue;
            std::set<Name> avoid = rng;
            auto body_names = all_names(body);
            avoid.insert(body_names.begin(), body_names.end());
            avoid.insert(params.begin(), params.end());
            Name np = fresh_name(prm, avoid);
            Subst rename;
            rename.emplace(prm, Channel{np, std::nullopt});
            body = subst_proc(body, rename);
            prm = np;
          }
          return p_def(n.name, std::move(params), subst_proc(body, active),
                       std::move(scope));
        } else if constexpr (std::is_same_v<T, PCall>) {
          std::vector<CallArg> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) {
            if (const auto* v = std::get_if<Value>(&a)) {
              args.push_back(subst_value(*v, s));
            } else {
              args.push_back(subst_channel(std::get<Channel>(a), s));
            }
          }
          return p_call(n.name, std::move(args));
        } else if constexpr (std::is_same_v<T, PNil>) {
          return p;
        } else {
          return p_par(subst_proc(n.left, s), subst_proc(n.right, s));
        }
      },
      p->node);
}

}  // namespace

ProcPtr substitute(const ProcPtr& p, const Subst& subst) {
  return subst_proc(p, subst);
}

Subst bind_params(const std::vector<Name>& params, const std::vector<CallArg>& args,
                  const Name& proc_name) {
  if (params.size() != args.size()) {
    throw SubstError("arity mismatch calling " + proc_name + ": expected " +
                     std::to_string(params.size()) + " arguments, got " +
                     std::to_string(args.size()));
  }
  Subst s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (const auto* v = std::get_if<Value>(&args[i])) {
      s.emplace(params[i], *v);
    } else {
      s.emplace(params[i], std::get<Channel>(args[i]));
    }
  }
  return s;
}

namespace {

// Canonical key: bound names render as scope-stack levels (alpha-invariant),
// free names verbatim; choice arms are rendered then label-sorted so arm
// order is irrelevant.
struct KeyCtx {
  std::vector<Name> scope;       // sessions + variables
  std::vector<Name> proc_scope;  // process variables

  std::string resolve(const Name& n) const {
    for (std::size_t i = scope.size(); i-- > 0;) {
      if (scope[i] == n) return "^" + std::to_string(i);
    }
    return n;
  }
  std::string resolve_proc(const Name& n) const {
    for (std::size_t i = proc_scope.size(); i-- > 0;) {
      if (proc_scope[i] == n) return "^" + std::to_string(i);
    }
    return n;
  }
};

std::string key_value(const Value& v, const KeyCtx& ctx) {
  if (const auto* sr = std::get_if<SessionRef>(&v)) return "~" + ctx.resolve(sr->name);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "#t" : "#f";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return "#" + std::to_string(*i);
  return "$" + ctx.resolve(std::get<StrVal>(v).text);
}

std::string key_channel(const Channel& c, const KeyCtx& ctx) {
  std::string s = ctx.resolve(c.name);
  if (c.role) s += "[" + *c.role + "]";
  return s;
}

std::string key_proc(const ProcPtr& p, KeyCtx ctx) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          std::vector<std::string> arms;
          for (const auto& a : n.arms) {
            arms.push_back(a.label + "<" + rational_string(a.prob) + ":" +
                           key_value(a.payload, ctx) + "." + key_proc(a.cont, ctx) + ">");
          }
          std::sort(arms.begin(), arms.end());
          std::string s = "!" + key_channel(n.chan, ctx) + "%" + n.partner + "{";
          for (const auto& a : arms) s += a;
          return s + "}";
        } else if constexpr (std::is_same_v<T, PBranch>) {
          std::vector<std::string> arms;
          for (const auto& a : n.arms) {
            KeyCtx inner = ctx;
            inner.scope.push_back(a.binder);
            arms.push_back(a.label + "<" + key_proc(a.cont, inner) + ">");
          }
          std::sort(arms.begin(), arms.end());
          std::string s = "?" + key_channel(n.chan, ctx) + "%" + n.partner + "{";
          for (const auto& a : arms) s += a;
          return s + "}";
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          std::string anno = n.annotation ? canonical_key(n.annotation) : "";
          KeyCtx inner = ctx;
          inner.scope.push_back(n.session);
          return "nu<" + anno + ">." + key_proc(n.body, inner);
        } else if constexpr (std::is_same_v<T, PDef>) {
          KeyCtx body_ctx = ctx;
          body_ctx.proc_scope.push_back(n.name);
          for (const auto& prm : n.params) body_ctx.scope.push_back(prm);
          KeyCtx scope_ctx = ctx;
          scope_ctx.proc_scope.push_back(n.name);
          return "def/" + std::to_string(n.params.size()) + "<" +
                 key_proc(n.body, body_ctx) + ">in<" + key_proc(n.scope, scope_ctx) + ">";
        } else if constexpr (std::is_same_v<T, PCall>) {
          std::string s = "call:" + ctx.resolve_proc(n.name) + "(";
          for (const auto& a : n.args) {
            if (const auto* v = std::get_if<Value>(&a)) {
              s += key_value(*v, ctx) + ",";
            } else {
              s += key_channel(std::get<Channel>(a), ctx) + ",";
            }
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, PNil>) {
          return "0";
        } else {
          return "(" + key_proc(n.left, ctx) + "|" + key_proc(n.right, ctx) + ")";
        }
      },
      p->node);
}

}  // namespace

std::string canonical_key(const ProcPtr& p) {
  return key_proc(p, KeyCtx{});
}

bool struct_equal(const ProcPtr& a, const ProcPtr& b) {
  return canonical_key(a) == canonical_key(b);
}

}  // namespace mpst

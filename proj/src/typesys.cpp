#include "mpst/typesys.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

namespace mpst {

IntervalSetVerdict classify_interval_set(const std::vector<ImpreciseProb>& deltas) {
  Rational lo_sum = 0;
  Rational hi_sum = 0;
  for (const auto& d : deltas) {
    lo_sum += d.lo;
    hi_sum += d.hi;
  }
  IntervalSetVerdict v;
  v.proper = lo_sum <= 1 && 1 <= hi_sum;
  v.reachable = true;
  for (const auto& d : deltas) {
    // others at their lower bounds must leave room for this upper endpoint,
    // others at their upper bounds must cover up to this lower endpoint
    if (!((lo_sum - d.lo) + d.hi <= 1 && 1 <= (hi_sum - d.hi) + d.lo)) {
      v.reachable = false;
      break;
    }
  }
  return v;
}

namespace {

// Closure machinery for equi-recursive comparison. A state is a subterm
// paired with an environment resolving its free recursion variables to the
// closures of their binders. Environment frames are hash-consed per
// (binder node, outer environment) so that repeated unfoldings of one
// recursive type yield pointer-identical states and the bisimulation memo
// terminates.
struct EnvNode;

struct Clo {
  const LocalType* t;
  const EnvNode* env;
  friend bool operator==(const Clo&, const Clo&) = default;
  auto operator<=>(const Clo&) const = default;
};

struct EnvNode {
  Name var;
  Clo rec;  // closure of the binder itself (an LRec node)
  const EnvNode* next;
};

struct UnfoldCtx {
  std::vector<std::unique_ptr<EnvNode>> arena;
  std::map<std::pair<const LocalType*, const EnvNode*>, const EnvNode*> frames;

  const EnvNode* frame(const LRec& r, const Clo& at) {
    auto key = std::make_pair(at.t, at.env);
    auto it = frames.find(key);
    if (it != frames.end()) return it->second;
    arena.push_back(std::make_unique<EnvNode>(EnvNode{r.var, at, at.env}));
    const EnvNode* f = arena.back().get();
    frames.emplace(key, f);
    return f;
  }

  const Clo* lookup(const EnvNode* env, const Name& var) {
    for (; env != nullptr; env = env->next) {
      if (env->var == var) return &env->rec;
    }
    return nullptr;
  }

  // Unfolds recursion binders and bound variables until a communication
  // constructor, end, or a free variable is exposed.
  Clo resolve(Clo c) {
    std::set<Clo> seen;
    for (;;) {
      if (const auto* r = std::get_if<LRec>(&c.t->node)) {
        if (!seen.insert(c).second)
          throw std::logic_error("recursive type without a guard");
        c = Clo{r->body.get(), frame(*r, c)};
        continue;
      }
      if (const auto* v = std::get_if<LVar>(&c.t->node)) {
        const Clo* bound = lookup(c.env, v->name);
        if (bound == nullptr) return c;  // free variable: opaque head
        if (!seen.insert(c).second)
          throw std::logic_error("recursive type without a guard");
        c = *bound;
        continue;
      }
      return c;
    }
  }
};

bool equal_types(const LocalPtr& a, const LocalPtr& b, bool with_deltas) {
  UnfoldCtx ctx;
  std::set<std::pair<Clo, Clo>> assumed;
  std::deque<std::pair<Clo, Clo>> work;
  work.push_back({Clo{a.get(), nullptr}, Clo{b.get(), nullptr}});
  while (!work.empty()) {
    auto [ca, cb] = work.front();
    work.pop_front();
    ca = ctx.resolve(ca);
    cb = ctx.resolve(cb);
    if (!assumed.insert({ca, cb}).second) continue;
    if (ca.t->node.index() != cb.t->node.index()) return false;
    if (std::holds_alternative<LEnd>(ca.t->node)) continue;
    if (const auto* va = std::get_if<LVar>(&ca.t->node)) {
      // both free after resolution
      if (va->name != std::get<LVar>(cb.t->node).name) return false;
      continue;
    }
    if (const auto* sa = std::get_if<LSelect>(&ca.t->node)) {
      const auto& sb = std::get<LSelect>(cb.t->node);
      if (sa->partner != sb.partner || sa->arms.size() != sb.arms.size()) return false;
      for (const auto& arm : sa->arms) {
        const SelectArm* other = nullptr;
        for (const auto& cand : sb.arms) {
          if (cand.label == arm.label) {
            other = &cand;
            break;
          }
        }
        if (other == nullptr || other->sort != arm.sort) return false;
        if (with_deltas && !(other->delta == arm.delta)) return false;
        work.push_back({Clo{arm.cont.get(), ca.env}, Clo{other->cont.get(), cb.env}});
      }
      continue;
    }
    const auto& ba = std::get<LBranch>(ca.t->node);
    const auto& bb = std::get<LBranch>(cb.t->node);
    if (ba.partner != bb.partner || ba.arms.size() != bb.arms.size()) return false;
    for (const auto& arm : ba.arms) {
      const BranchArm* other = nullptr;
      for (const auto& cand : bb.arms) {
        if (cand.label == arm.label) {
          other = &cand;
          break;
        }
      }
      if (other == nullptr || other->sort != arm.sort) return false;
      work.push_back({Clo{arm.cont.get(), ca.env}, Clo{other->cont.get(), cb.env}});
    }
  }
  return true;
}

}  // namespace

namespace {

// var := rep, stopping at shadowing binders. rep is a whole recursive type
// whose only free variable can be var itself, so no capture can occur.
LocalPtr subst_tvar(const LocalPtr& t, const Name& var, const LocalPtr& rep) {
  if (const auto* v = std::get_if<LVar>(&t->node)) return v->name == var ? rep : t;
  if (const auto* r = std::get_if<LRec>(&t->node))
    return r->var == var ? t : l_rec(r->var, subst_tvar(r->body, var, rep));
  if (const auto* s = std::get_if<LSelect>(&t->node)) {
    std::vector<SelectArm> arms;
    for (const auto& a : s->arms)
      arms.push_back({a.delta, a.label, a.sort, subst_tvar(a.cont, var, rep)});
    return l_select(s->partner, std::move(arms));
  }
  if (const auto* b = std::get_if<LBranch>(&t->node)) {
    std::vector<BranchArm> arms;
    for (const auto& a : b->arms) arms.push_back({a.label, a.sort, subst_tvar(a.cont, var, rep)});
    return l_branch(b->partner, std::move(arms));
  }
  return t;
}

}  // namespace

LocalPtr unfold_head(const LocalPtr& t) {
  LocalPtr cur = t;
  for (int guard = 0; guard < 1000; ++guard) {
    const auto* r = std::get_if<LRec>(&cur->node);
    if (r == nullptr) return cur;
    cur = subst_tvar(r->body, r->var, cur);
  }
  throw std::logic_error("recursive type without a guard");
}

bool type_equal(const LocalPtr& a, const LocalPtr& b) { return equal_types(a, b, true); }

bool erased_type_equal(const LocalPtr& a, const LocalPtr& b) {
  return equal_types(a, b, false);
}

namespace {

std::string shown_path(const std::string& path) { return path.empty() ? "/" : path; }

LocalPtr project_at(const GlobalPtr& g, const Name& role, const std::string& path) {
  if (std::holds_alternative<GEnd>(g->node)) return l_end();
  if (const auto* v = std::get_if<GVar>(&g->node)) return l_var(v->name);
  if (const auto* r = std::get_if<GRec>(&g->node)) {
    LocalPtr body = project_at(r->body, role, path);
    if (std::holds_alternative<LEnd>(body->node)) return l_end();
    if (const auto* bv = std::get_if<LVar>(&body->node); bv != nullptr && bv->name == r->var)
      return l_end();  // the role takes no part in the loop
    return l_rec(r->var, body);
  }
  const auto& it = std::get<GInteraction>(g->node);
  if (it.from == it.to)
    throw ProjectError("self-communication", shown_path(path),
                       "interaction from " + it.from + " to itself at " + shown_path(path));
  if (role == it.from) {
    std::vector<SelectArm> arms;
    for (const auto& a : it.arms)
      arms.push_back({a.delta, a.label, a.sort, project_at(a.cont, role, path + "/" + a.label)});
    return l_select(it.to, std::move(arms));
  }
  if (role == it.to) {
    std::vector<BranchArm> arms;
    for (const auto& a : it.arms)
      arms.push_back({a.label, a.sort, project_at(a.cont, role, path + "/" + a.label)});
    return l_branch(it.from, std::move(arms));
  }
  std::vector<LocalPtr> projections;
  for (const auto& a : it.arms)
    projections.push_back(project_at(a.cont, role, path + "/" + a.label));
  for (std::size_t i = 1; i < projections.size(); ++i) {
    if (!type_equal(projections[0], projections[i])) {
      std::ostringstream os;
      os << "branches " << it.arms[0].label << " and " << it.arms[i].label << " at "
         << shown_path(path) << " project differently for non-participant " << role;
      throw ProjectError("non-mergeable-branches", shown_path(path), os.str());
    }
  }
  return projections[0];
}

}  // namespace

LocalPtr project(const GlobalPtr& g, const Name& role) { return project_at(g, role, ""); }

namespace {

void collect_roles(const GlobalPtr& g, std::set<Name>& out) {
  if (const auto* it = std::get_if<GInteraction>(&g->node)) {
    out.insert(it->from);
    out.insert(it->to);
    for (const auto& a : it->arms) collect_roles(a.cont, out);
    return;
  }
  if (const auto* r = std::get_if<GRec>(&g->node)) collect_roles(r->body, out);
}

void audit_interval_sets(const GlobalPtr& g, const std::string& path,
                         std::vector<WfBadSet>& bad) {
  if (const auto* it = std::get_if<GInteraction>(&g->node)) {
    std::vector<ImpreciseProb> deltas;
    for (const auto& a : it->arms) deltas.push_back(a.delta);
    IntervalSetVerdict v = classify_interval_set(deltas);
    if (!v.reachable) {
      std::string shown = "{";
      for (std::size_t i = 0; i < deltas.size(); ++i)
        shown += (i ? "," : "") + interval_string(deltas[i]);
      shown += "}";
      bad.push_back({shown_path(path), std::move(shown), v.proper, v.reachable});
    }
    for (const auto& a : it->arms) audit_interval_sets(a.cont, path + "/" + a.label, bad);
    return;
  }
  if (const auto* r = std::get_if<GRec>(&g->node)) audit_interval_sets(r->body, path, bad);
}

}  // namespace

std::vector<Name> roles_of(const GlobalPtr& g) {
  std::set<Name> s;
  collect_roles(g, s);
  return {s.begin(), s.end()};
}

WfReport well_formed(const GlobalPtr& g) {
  WfReport rep;
  for (const auto& role : roles_of(g)) {
    try {
      rep.projections[role] = project(g, role);
    } catch (const ProjectError& e) {
      rep.undefined[role] = e.kind + " at " + e.path;
    }
  }
  audit_interval_sets(g, "", rep.bad_interval_sets);
  rep.ok = rep.undefined.empty() && rep.bad_interval_sets.empty();
  return rep;
}

ErasedPtr erase(const LocalPtr& t) {
  if (std::holds_alternative<LEnd>(t->node))
    return std::make_shared<const ErasedType>(ErasedType{EEnd{}});
  if (const auto* v = std::get_if<LVar>(&t->node))
    return std::make_shared<const ErasedType>(ErasedType{EVar{v->name}});
  if (const auto* r = std::get_if<LRec>(&t->node))
    return std::make_shared<const ErasedType>(ErasedType{ERec{r->var, erase(r->body)}});
  if (const auto* s = std::get_if<LSelect>(&t->node)) {
    std::vector<ErasedArm> arms;
    for (const auto& a : s->arms) arms.push_back({a.label, a.sort, erase(a.cont)});
    return std::make_shared<const ErasedType>(ErasedType{ESelect{s->partner, std::move(arms)}});
  }
  const auto& b = std::get<LBranch>(t->node);
  std::vector<ErasedArm> arms;
  for (const auto& a : b.arms) arms.push_back({a.label, a.sort, erase(a.cont)});
  return std::make_shared<const ErasedType>(ErasedType{EBranch{b.partner, std::move(arms)}});
}

LocalPtr unit_intervals(const LocalPtr& t) {
  if (std::holds_alternative<LEnd>(t->node) || std::holds_alternative<LVar>(t->node)) return t;
  if (const auto* r = std::get_if<LRec>(&t->node)) return l_rec(r->var, unit_intervals(r->body));
  if (const auto* s = std::get_if<LSelect>(&t->node)) {
    std::vector<SelectArm> arms;
    for (const auto& a : s->arms)
      arms.push_back({ImpreciseProb{0, 1}, a.label, a.sort, unit_intervals(a.cont)});
    return l_select(s->partner, std::move(arms));
  }
  const auto& b = std::get<LBranch>(t->node);
  std::vector<BranchArm> arms;
  for (const auto& a : b.arms) arms.push_back({a.label, a.sort, unit_intervals(a.cont)});
  return l_branch(b.partner, std::move(arms));
}

GlobalPtr unit_intervals(const GlobalPtr& g) {
  if (const auto* it = std::get_if<GInteraction>(&g->node)) {
    std::vector<GlobalArm> arms;
    for (const auto& a : it->arms)
      arms.push_back({ImpreciseProb{0, 1}, a.label, a.sort, unit_intervals(a.cont)});
    return g_interaction(it->from, it->to, std::move(arms));
  }
  if (const auto* r = std::get_if<GRec>(&g->node)) return g_rec(r->var, unit_intervals(r->body));
  return g;
}

namespace {

struct IntersectCtx {
  std::optional<IntersectUndefined> bad;
  std::map<Name, int> scope_a;
  std::map<Name, int> scope_b;
  int depth = 0;

  void fail(std::string kind, std::string detail) {
    if (!bad) bad = IntersectUndefined{std::move(kind), std::move(detail)};
  }
};

LocalPtr meet(const LocalPtr& a, const LocalPtr& b, const std::string& path, IntersectCtx& ctx) {
  if (ctx.bad) return nullptr;
  if (std::holds_alternative<LEnd>(a->node) && std::holds_alternative<LEnd>(b->node)) return a;
  if (const auto* va = std::get_if<LVar>(&a->node)) {
    const auto* vb = std::get_if<LVar>(&b->node);
    if (vb == nullptr) {
      ctx.fail("shape-mismatch", "recursion variable against a different construct at " +
                                     shown_path(path));
      return nullptr;
    }
    auto ia = ctx.scope_a.find(va->name);
    auto ib = ctx.scope_b.find(vb->name);
    bool same = (ia == ctx.scope_a.end() && ib == ctx.scope_b.end())
                    ? va->name == vb->name
                    : (ia != ctx.scope_a.end() && ib != ctx.scope_b.end() &&
                       ia->second == ib->second);
    if (!same)
      ctx.fail("shape-mismatch",
               "recursion variables " + va->name + " and " + vb->name +
                   " refer to different binders at " + shown_path(path));
    return ctx.bad ? nullptr : a;
  }
  if (const auto* ra = std::get_if<LRec>(&a->node)) {
    const auto* rb = std::get_if<LRec>(&b->node);
    if (rb == nullptr) {
      ctx.fail("shape-mismatch",
               "recursion against a different construct at " + shown_path(path));
      return nullptr;
    }
    auto saved_a = ctx.scope_a.count(ra->var) ? std::optional<int>(ctx.scope_a[ra->var])
                                              : std::nullopt;
    auto saved_b = ctx.scope_b.count(rb->var) ? std::optional<int>(ctx.scope_b[rb->var])
                                              : std::nullopt;
    ctx.scope_a[ra->var] = ctx.depth;
    ctx.scope_b[rb->var] = ctx.depth;
    ++ctx.depth;
    LocalPtr body = meet(ra->body, rb->body, path, ctx);
    --ctx.depth;
    if (saved_a)
      ctx.scope_a[ra->var] = *saved_a;
    else
      ctx.scope_a.erase(ra->var);
    if (saved_b)
      ctx.scope_b[rb->var] = *saved_b;
    else
      ctx.scope_b.erase(rb->var);
    return ctx.bad ? nullptr : l_rec(ra->var, body);
  }
  if (const auto* sa = std::get_if<LSelect>(&a->node)) {
    const auto* sb = std::get_if<LSelect>(&b->node);
    if (sb == nullptr || sa->partner != sb->partner || sa->arms.size() != sb->arms.size()) {
      ctx.fail("shape-mismatch", "selection shapes differ at " + shown_path(path));
      return nullptr;
    }
    std::vector<SelectArm> arms;
    for (const auto& arm : sa->arms) {
      const SelectArm* other = nullptr;
      for (const auto& cand : sb->arms) {
        if (cand.label == arm.label) {
          other = &cand;
          break;
        }
      }
      if (other == nullptr || other->sort != arm.sort) {
        ctx.fail("shape-mismatch",
                 "selection label " + arm.label + " unmatched at " + shown_path(path));
        return nullptr;
      }
      ImpreciseProb d{std::max(arm.delta.lo, other->delta.lo),
                      std::min(arm.delta.hi, other->delta.hi)};
      if (d.lo > d.hi) {
        ctx.fail("empty-interval", "label " + arm.label + " at " + shown_path(path) + ": " +
                                       interval_string(arm.delta) + " and " +
                                       interval_string(other->delta) + " do not meet");
        return nullptr;
      }
      LocalPtr cont = meet(arm.cont, other->cont, path + "/" + arm.label, ctx);
      if (ctx.bad) return nullptr;
      arms.push_back({d, arm.label, arm.sort, cont});
    }
    return l_select(sa->partner, std::move(arms));
  }
  if (const auto* ba = std::get_if<LBranch>(&a->node)) {
    const auto* bb = std::get_if<LBranch>(&b->node);
    if (bb == nullptr || ba->partner != bb->partner || ba->arms.size() != bb->arms.size()) {
      ctx.fail("shape-mismatch", "branching shapes differ at " + shown_path(path));
      return nullptr;
    }
    std::vector<BranchArm> arms;
    for (const auto& arm : ba->arms) {
      const BranchArm* other = nullptr;
      for (const auto& cand : bb->arms) {
        if (cand.label == arm.label) {
          other = &cand;
          break;
        }
      }
      if (other == nullptr || other->sort != arm.sort) {
        ctx.fail("shape-mismatch",
                 "branching label " + arm.label + " unmatched at " + shown_path(path));
        return nullptr;
      }
      LocalPtr cont = meet(arm.cont, other->cont, path + "/" + arm.label, ctx);
      if (ctx.bad) return nullptr;
      arms.push_back({arm.label, arm.sort, cont});
    }
    return l_branch(ba->partner, std::move(arms));
  }
  ctx.fail("shape-mismatch", "constructs differ at " + shown_path(path));
  return nullptr;
}

}  // namespace

IntersectResult intersect_local(const LocalPtr& a, const LocalPtr& b, const Name&) {
  IntersectCtx ctx;
  LocalPtr t = meet(a, b, "", ctx);
  if (ctx.bad) return {nullptr, ctx.bad};
  return {t, std::nullopt};
}

IntersectResult intersect_typing_entry(const Channel& c, const LocalPtr& a, const LocalPtr& b) {
  return intersect_local(a, b, c.role ? *c.role : c.name);
}

TypingIntersection intersect_typing(const Typing& a, const Typing& b) {
  TypingIntersection out;
  if (a.size() != b.size()) {
    out.undefined = IntersectUndefined{"domain-mismatch", "typings have different domains"};
    return out;
  }
  for (const auto& [chan, ta] : a) {
    auto it = b.find(chan);
    if (it == b.end()) {
      out.undefined = IntersectUndefined{
          "domain-mismatch", "entry " + chan.display() + " missing from one typing"};
      return out;
    }
    IntersectResult r = intersect_typing_entry(chan, ta, it->second);
    if (r.undefined) {
      r.undefined->detail = chan.display() + ": " + r.undefined->detail;
      out.undefined = r.undefined;
      return out;
    }
    out.typing.emplace(chan, r.type);
  }
  return out;
}

}  // namespace mpst

#include "mpst/congruence.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace mpst {

namespace {

struct NuBinder {
  Name name;
  GlobalPtr anno;
};
struct DefBinder {
  Name name;
  std::vector<Name> params;
  ProcPtr body;
};
using Binder = std::variant<NuBinder, DefBinder>;

struct Level {
  std::vector<Binder> binders;
  std::vector<ProcPtr> atoms;  // Select / Branch / Call
};

ProcPtr rebuild(const Level& lv) {
  ProcPtr core;
  if (lv.atoms.empty()) {
    core = p_nil();
  } else {
    core = lv.atoms.back();
    for (std::size_t i = lv.atoms.size() - 1; i-- > 0;) {
      core = p_par(lv.atoms[i], core);
    }
  }
  for (std::size_t i = lv.binders.size(); i-- > 0;) {
    if (const auto* nu = std::get_if<NuBinder>(&lv.binders[i])) {
      core = p_restrict(nu->name, core, nu->anno);
    } else {
      const auto& d = std::get<DefBinder>(lv.binders[i]);
      core = p_def(d.name, d.params, d.body, core);
    }
  }
  return core;
}

// Free names of a declaration (body minus params and its own name).
struct DeclFree {
  std::set<Name> names;      // value/session namespace
  std::set<Name> proc_vars;  // called process variables
};

DeclFree decl_free(const DefBinder& d) {
  BinderReport r = binder_report(p_def(d.name, d.params, d.body, p_nil()));
  DeclFree out;
  out.names = r.free_vars;
  for (const auto& c : r.free_channels) out.names.insert(c.name);
  out.proc_vars = r.free_proc_vars;
  return out;
}

std::set<Name> level_free_names(const Level& lv) {
  BinderReport r = binder_report(rebuild(lv));
  std::set<Name> out = r.free_vars;
  for (const auto& c : r.free_channels) out.insert(c.name);
  return out;
}

Name fresh_against(const Name& base, const std::set<Name>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    Name cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

// Renames the value/session binder at index idx throughout its scope (later
// binders and atoms).
void rename_nu(Level& lv, std::size_t idx, const Name& nb) {
  auto& nu = std::get<NuBinder>(lv.binders[idx]);
  Name old = nu.name;
  Subst s;
  s.emplace(old, Channel{nb, std::nullopt});
  nu.name = nb;
  for (std::size_t j = idx + 1; j < lv.binders.size(); ++j) {
    if (auto* d = std::get_if<DefBinder>(&lv.binders[j])) {
      ProcPtr as_def = p_def(d->name, d->params, d->body, p_nil());
      as_def = substitute(as_def, s);
      const auto& nd = std::get<PDef>(as_def->node);
      d->params = nd.params;
      d->body = nd.body;
    } else if (std::get<NuBinder>(lv.binders[j]).name == old) {
      return;  // shadowed below; occurrences there belong to the inner binder
    }
  }
  for (auto& a : lv.atoms) a = substitute(a, s);
}

ProcPtr rename_proc_var(const ProcPtr& p, const Name& from, const Name& to);

ProcPtr rename_proc_var(const ProcPtr& p, const Name& from, const Name& to) {
  return std::visit(
      [&](const auto& n) -> ProcPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          std::vector<SelectArmP> arms;
          for (const auto& a : n.arms) {
            arms.push_back(SelectArmP{a.prob, a.label, a.payload,
                                      rename_proc_var(a.cont, from, to)});
          }
          return p_select(n.chan, n.partner, std::move(arms));
        } else if constexpr (std::is_same_v<T, PBranch>) {
          std::vector<BranchArmP> arms;
          for (const auto& a : n.arms) {
            arms.push_back(
                BranchArmP{a.label, a.binder, rename_proc_var(a.cont, from, to)});
          }
          return p_branch(n.chan, n.partner, std::move(arms));
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          return p_restrict(n.session, rename_proc_var(n.body, from, to), n.annotation);
        } else if constexpr (std::is_same_v<T, PDef>) {
          if (n.name == from) return std::make_shared<Process>(Process{n});
          return p_def(n.name, n.params, rename_proc_var(n.body, from, to),
                       rename_proc_var(n.scope, from, to));
        } else if constexpr (std::is_same_v<T, PCall>) {
          if (n.name != from) return std::make_shared<Process>(Process{n});
          return p_call(to, n.args);
        } else if constexpr (std::is_same_v<T, PNil>) {
          return p;
        } else {
          return p_par(rename_proc_var(n.left, from, to),
                       rename_proc_var(n.right, from, to));
        }
      },
      p->node);
}

void rename_def(Level& lv, std::size_t idx, const Name& nb) {
  auto& db = std::get<DefBinder>(lv.binders[idx]);
  Name old = db.name;
  db.name = nb;
  db.body = rename_proc_var(db.body, old, nb);  // recursive occurrences
  for (std::size_t j = idx + 1; j < lv.binders.size(); ++j) {
    if (auto* d = std::get_if<DefBinder>(&lv.binders[j])) {
      if (d->name == old) return;  // shadowed below
      d->body = rename_proc_var(d->body, old, nb);
    }
  }
  for (auto& a : lv.atoms) a = rename_proc_var(a, old, nb);
}

// Peels top binders and flattens parallel composition. Keeps binder names
// unique within the prefix and disjoint from sibling components' free names.
Level extract_level(const ProcPtr& p) {
  return std::visit(
      [&](const auto& n) -> Level {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PNil>) {
          return Level{};
        } else if constexpr (std::is_same_v<T, PPar>) {
          Level a = extract_level(n.left);
          Level b = extract_level(n.right);
          // a's binders will scope over all of b, and b's binders over a's
          // atoms; rename any binder clashing with the other side's free
          // names or with binder names already taken.
          std::set<Name> free_a = level_free_names(a);
          std::set<Name> free_b = level_free_names(b);
          std::set<Name> taken_nu, taken_def;
          auto disarm = [&](Level& lv, const std::set<Name>& other_free) {
            for (std::size_t i = 0; i < lv.binders.size(); ++i) {
              if (auto* nu = std::get_if<NuBinder>(&lv.binders[i])) {
                if (other_free.count(nu->name) || taken_nu.count(nu->name)) {
                  std::set<Name> avoid = other_free;
                  avoid.insert(taken_nu.begin(), taken_nu.end());
                  auto mine = level_free_names(lv);
                  avoid.insert(mine.begin(), mine.end());
                  for (const auto& bd : lv.binders) {
                    if (const auto* x = std::get_if<NuBinder>(&bd)) avoid.insert(x->name);
                  }
                  rename_nu(lv, i, fresh_against(nu->name, avoid));
                }
                taken_nu.insert(std::get<NuBinder>(lv.binders[i]).name);
              } else {
                auto* db = std::get_if<DefBinder>(&lv.binders[i]);
                if (taken_def.count(db->name) || other_free.count(db->name)) {
                  std::set<Name> avoid = taken_def;
                  avoid.insert(other_free.begin(), other_free.end());
                  BinderReport mine = binder_report(rebuild(lv));
                  avoid.insert(mine.free_proc_vars.begin(), mine.free_proc_vars.end());
                  for (const auto& bd : lv.binders) {
                    if (const auto* x = std::get_if<DefBinder>(&bd)) avoid.insert(x->name);
                  }
                  rename_def(lv, i, fresh_against(db->name, avoid));
                }
                taken_def.insert(std::get<DefBinder>(lv.binders[i]).name);
              }
            }
          };
          // Free process variables also guard def renaming.
          {
            BinderReport rb = binder_report(rebuild(b));
            free_b.insert(rb.free_proc_vars.begin(), rb.free_proc_vars.end());
            BinderReport ra = binder_report(rebuild(a));
            free_a.insert(ra.free_proc_vars.begin(), ra.free_proc_vars.end());
          }
          disarm(a, free_b);
          disarm(b, free_a);
          Level out;
          out.binders = a.binders;
          out.binders.insert(out.binders.end(), b.binders.begin(), b.binders.end());
          out.atoms = a.atoms;
          out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
          // Uniquify duplicate binder names across the two prefixes.
          std::set<Name> seen_nu, seen_def;
          for (std::size_t i = 0; i < out.binders.size(); ++i) {
            if (auto* nu = std::get_if<NuBinder>(&out.binders[i])) {
              if (!seen_nu.insert(nu->name).second) {
                std::set<Name> avoid = seen_nu;
                auto fn = level_free_names(out);
                avoid.insert(fn.begin(), fn.end());
                Name nb = fresh_against(nu->name, avoid);
                rename_nu(out, i, nb);
                seen_nu.insert(nb);
              }
            } else {
              auto* db = std::get_if<DefBinder>(&out.binders[i]);
              if (!seen_def.insert(db->name).second) {
                std::set<Name> avoid = seen_def;
                BinderReport rb = binder_report(rebuild(out));
                avoid.insert(rb.free_proc_vars.begin(), rb.free_proc_vars.end());
                Name nb = fresh_against(db->name, avoid);
                rename_def(out, i, nb);
                seen_def.insert(nb);
              }
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          Level inner = extract_level(n.body);
          // Keep prefix names unique: rename an inner clash, not this binder.
          for (std::size_t i = 0; i < inner.binders.size(); ++i) {
            if (auto* nu = std::get_if<NuBinder>(&inner.binders[i])) {
              if (nu->name == n.session) {
                std::set<Name> avoid = level_free_names(inner);
                avoid.insert(n.session);
                for (const auto& bd : inner.binders) {
                  if (const auto* x = std::get_if<NuBinder>(&bd)) avoid.insert(x->name);
                }
                rename_nu(inner, i, fresh_against(nu->name, avoid));
                break;  // at most one visible duplicate; deeper ones shadowed
              }
            }
          }
          Level out;
          out.binders.push_back(NuBinder{n.session, n.annotation});
          out.binders.insert(out.binders.end(), inner.binders.begin(),
                             inner.binders.end());
          out.atoms = inner.atoms;
          return out;
        } else if constexpr (std::is_same_v<T, PDef>) {
          Level inner = extract_level(n.scope);
          for (std::size_t i = 0; i < inner.binders.size(); ++i) {
            if (auto* db = std::get_if<DefBinder>(&inner.binders[i])) {
              if (db->name == n.name) {
                std::set<Name> avoid;
                BinderReport rb = binder_report(rebuild(inner));
                avoid.insert(rb.free_proc_vars.begin(), rb.free_proc_vars.end());
                avoid.insert(n.name);
                for (const auto& bd : inner.binders) {
                  if (const auto* x = std::get_if<DefBinder>(&bd)) avoid.insert(x->name);
                }
                rename_def(inner, i, fresh_against(db->name, avoid));
                break;
              }
            }
          }
          Level out;
          out.binders.push_back(DefBinder{n.name, n.params, n.body});
          out.binders.insert(out.binders.end(), inner.binders.begin(),
                             inner.binders.end());
          out.atoms = inner.atoms;
          return out;
        } else {
          Level out;
          out.atoms.push_back(p);
          return out;
        }
      },
      p->node);
}

ProcPtr nf(const ProcPtr& p);

// Normalizes an atom's interior: continuations recursively, arms label-sorted.
ProcPtr atom_nf(const ProcPtr& a) {
  return std::visit(
      [&](const auto& n) -> ProcPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          std::vector<SelectArmP> arms;
          for (const auto& arm : n.arms) {
            arms.push_back(SelectArmP{arm.prob, arm.label, arm.payload, nf(arm.cont)});
          }
          std::sort(arms.begin(), arms.end(),
                    [](const auto& x, const auto& y) { return x.label < y.label; });
          return p_select(n.chan, n.partner, std::move(arms));
        } else if constexpr (std::is_same_v<T, PBranch>) {
          std::vector<BranchArmP> arms;
          for (const auto& arm : n.arms) {
            arms.push_back(BranchArmP{arm.label, arm.binder, nf(arm.cont)});
          }
          std::sort(arms.begin(), arms.end(),
                    [](const auto& x, const auto& y) { return x.label < y.label; });
          return p_branch(n.chan, n.partner, std::move(arms));
        } else {
          return a;  // Call
        }
      },
      a->node);
}

// Drops restrictions no atom or later declaration uses, and definitions
// nothing calls; both eliminations are derivable from the congruence axioms.
void gc(Level& lv) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = lv.binders.size(); i-- > 0;) {
      bool used = false;
      if (const auto* nu = std::get_if<NuBinder>(&lv.binders[i])) {
        for (std::size_t j = i + 1; j < lv.binders.size() && !used; ++j) {
          if (const auto* d = std::get_if<DefBinder>(&lv.binders[j])) {
            if (decl_free(*d).names.count(nu->name)) used = true;
          } else if (std::get<NuBinder>(lv.binders[j]).name == nu->name) {
            break;  // shadowed: occurrences below belong to the inner binder
          }
        }
        if (!used) {
          for (const auto& a : lv.atoms) {
            if (free_session_names(a).count(nu->name)) {
              used = true;
              break;
            }
          }
        }
      } else {
        const auto& db = std::get<DefBinder>(lv.binders[i]);
        for (std::size_t j = i + 1; j < lv.binders.size() && !used; ++j) {
          if (const auto* d = std::get_if<DefBinder>(&lv.binders[j])) {
            if (d->name == db.name) break;  // shadowed
            if (decl_free(*d).proc_vars.count(db.name)) used = true;
          }
        }
        if (!used) {
          for (const auto& a : lv.atoms) {
            if (binder_report(a).free_proc_vars.count(db.name)) {
              used = true;
              break;
            }
          }
        }
      }
      if (!used) {
        lv.binders.erase(lv.binders.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      }
    }
  }
}

// Appends "n:<name>" / "d:<name>" keys for free occurrences in traversal
// order; the resulting sequence is what makes binder reordering
// alpha-invariant (two congruent terms visit corresponding occurrences in the
// same positions).
void free_usage_order(const ProcPtr& p, std::set<Name> bound,
                      std::set<Name> bound_proc, std::vector<std::string>& out) {
  auto note_name = [&](const Name& n) {
    if (!bound.count(n)) out.push_back("n:" + n);
  };
  auto note_value = [&](const Value& v) {
    if (const auto* sr = std::get_if<SessionRef>(&v)) note_name(sr->name);
    if (const auto* sv = std::get_if<StrVal>(&v)) note_name(sv->text);
  };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          note_name(n.chan.name);
          for (const auto& a : n.arms) {
            note_value(a.payload);
            free_usage_order(a.cont, bound, bound_proc, out);
          }
        } else if constexpr (std::is_same_v<T, PBranch>) {
          note_name(n.chan.name);
          for (const auto& a : n.arms) {
            std::set<Name> inner = bound;
            inner.insert(a.binder);
            free_usage_order(a.cont, inner, bound_proc, out);
          }
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          std::set<Name> inner = bound;
          inner.insert(n.session);
          free_usage_order(n.body, inner, bound_proc, out);
        } else if constexpr (std::is_same_v<T, PDef>) {
          std::set<Name> body_bound = bound;
          body_bound.insert(n.params.begin(), n.params.end());
          std::set<Name> inner_proc = bound_proc;
          inner_proc.insert(n.name);
          free_usage_order(n.body, body_bound, inner_proc, out);
          free_usage_order(n.scope, bound, inner_proc, out);
        } else if constexpr (std::is_same_v<T, PCall>) {
          if (!bound_proc.count(n.name)) out.push_back("d:" + n.name);
          for (const auto& a : n.args) {
            if (const auto* v = std::get_if<Value>(&a)) {
              note_value(*v);
            } else {
              note_name(std::get<Channel>(a).name);
            }
          }
        } else if constexpr (std::is_same_v<T, PPar>) {
          free_usage_order(n.left, bound, bound_proc, out);
          free_usage_order(n.right, bound, bound_proc, out);
        }
      },
      p->node);
}

// First-use rank of each binder: occurrence order over sorted atoms, then
// over declaration bodies.
std::map<std::string, std::size_t> usage_ranks(const Level& lv) {
  std::vector<std::string> seq;
  for (const auto& a : lv.atoms) free_usage_order(a, {}, {}, seq);
  for (const auto& b : lv.binders) {
    if (const auto* d = std::get_if<DefBinder>(&b)) {
      std::set<Name> bound(d->params.begin(), d->params.end());
      free_usage_order(d->body, bound, {d->name}, seq);
    }
  }
  std::map<std::string, std::size_t> rank;
  std::size_t next = 0;
  for (const auto& key : seq) {
    if (!rank.count(key)) rank[key] = next++;
  }
  return rank;
}

bool depends_on(const Binder& later, const Binder& earlier) {
  const auto* d = std::get_if<DefBinder>(&later);
  if (!d) return false;  // a restriction has no body to depend through
  DeclFree df = decl_free(*d);
  if (const auto* nu = std::get_if<NuBinder>(&earlier)) {
    return df.names.count(nu->name) > 0;
  }
  return df.proc_vars.count(std::get<DefBinder>(earlier).name) > 0;
}

void reorder_binders(Level& lv) {
  auto ranks = usage_ranks(lv);
  auto rank_of = [&](const Binder& b) -> std::size_t {
    std::string key;
    if (const auto* nu = std::get_if<NuBinder>(&b)) {
      key = "n:" + nu->name;
    } else {
      key = "d:" + std::get<DefBinder>(b).name;
    }
    auto it = ranks.find(key);
    return it != ranks.end() ? it->second : ranks.size();
  };
  // Bubble toward rank order; a swap is skipped when the later binder depends
  // on the earlier one (the congruence side condition would be violated).
  bool changed = true;
  std::size_t guard = lv.binders.size() * lv.binders.size() + 1;
  while (changed && guard-- > 0) {
    changed = false;
    for (std::size_t i = 0; i + 1 < lv.binders.size(); ++i) {
      Binder& x = lv.binders[i];
      Binder& y = lv.binders[i + 1];
      bool out_of_order =
          rank_of(y) < rank_of(x) ||
          (rank_of(y) == rank_of(x) &&
           std::holds_alternative<NuBinder>(y) && std::holds_alternative<DefBinder>(x));
      if (out_of_order && !depends_on(y, x)) {
        std::swap(x, y);
        changed = true;
      }
    }
  }
}

ProcPtr nf(const ProcPtr& p) {
  Level lv = extract_level(p);
  for (auto& a : lv.atoms) a = atom_nf(a);
  for (auto& b : lv.binders) {
    if (auto* d = std::get_if<DefBinder>(&b)) d->body = nf(d->body);
  }
  gc(lv);
  std::stable_sort(lv.atoms.begin(), lv.atoms.end(),
                   [](const ProcPtr& x, const ProcPtr& y) {
                     return canonical_key(x) < canonical_key(y);
                   });
  reorder_binders(lv);
  return rebuild(lv);
}

}  // namespace

ProcPtr normal_form(const ProcPtr& p) {
  return nf(p);
}

bool congruent(const ProcPtr& a, const ProcPtr& b) {
  return struct_equal(normal_form(a), normal_form(b));
}

}  // namespace mpst

#include "mpst/types.hpp"

#include <algorithm>
#include <vector>

namespace mpst {

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Nat: return "nat";
    case Sort::Int: return "int";
    case Sort::Bool: return "bool";
    case Sort::Str: return "string";
  }
  return "?";
}

GlobalPtr g_interaction(Name from, Name to, std::vector<GlobalArm> arms) {
  return std::make_shared<GlobalType>(
      GlobalType{GInteraction{std::move(from), std::move(to), std::move(arms)}});
}
GlobalPtr g_rec(Name var, GlobalPtr body) {
  return std::make_shared<GlobalType>(GlobalType{GRec{std::move(var), std::move(body)}});
}
GlobalPtr g_var(Name name) {
  return std::make_shared<GlobalType>(GlobalType{GVar{std::move(name)}});
}
GlobalPtr g_end() {
  return std::make_shared<GlobalType>(GlobalType{GEnd{}});
}

LocalPtr l_select(Name partner, std::vector<SelectArm> arms) {
  return std::make_shared<LocalType>(
      LocalType{LSelect{std::move(partner), std::move(arms)}});
}
LocalPtr l_branch(Name partner, std::vector<BranchArm> arms) {
  return std::make_shared<LocalType>(
      LocalType{LBranch{std::move(partner), std::move(arms)}});
}
LocalPtr l_rec(Name var, LocalPtr body) {
  return std::make_shared<LocalType>(LocalType{LRec{std::move(var), std::move(body)}});
}
LocalPtr l_var(Name name) {
  return std::make_shared<LocalType>(LocalType{LVar{std::move(name)}});
}
LocalPtr l_end() {
  return std::make_shared<LocalType>(LocalType{LEnd{}});
}

std::string interval_string(const ImpreciseProb& d) {
  return "[" + rational_string(d.lo) + "," + rational_string(d.hi) + "]";
}

namespace {

struct TScope {
  std::vector<Name> vars;
  std::string resolve(const Name& n) const {
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (vars[i] == n) return "^" + std::to_string(i);
    }
    return n;
  }
};

std::string gkey(const GlobalPtr& g, TScope ctx) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GInteraction>) {
          std::vector<std::string> arms;
          for (const auto& a : n.arms) {
            arms.push_back(a.label + "<" + interval_string(a.delta) + ":" +
                           sort_name(a.sort) + "." + gkey(a.cont, ctx) + ">");
          }
          std::sort(arms.begin(), arms.end());
          std::string s = n.from + ">" + n.to + "{";
          for (const auto& a : arms) s += a;
          return s + "}";
        } else if constexpr (std::is_same_v<T, GRec>) {
          TScope inner = ctx;
          inner.vars.push_back(n.var);
          return "rec." + gkey(n.body, inner);
        } else if constexpr (std::is_same_v<T, GVar>) {
          return "t:" + ctx.resolve(n.name);
        } else {
          return "end";
        }
      },
      g->node);
}

std::string lkey(const LocalPtr& t, TScope ctx) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LSelect>) {
          std::vector<std::string> arms;
          for (const auto& a : n.arms) {
            arms.push_back(a.label + "<" + interval_string(a.delta) + ":" +
                           sort_name(a.sort) + "." + lkey(a.cont, ctx) + ">");
          }
          std::sort(arms.begin(), arms.end());
          std::string s = "!" + n.partner + "{";
          for (const auto& a : arms) s += a;
          return s + "}";
        } else if constexpr (std::is_same_v<T, LBranch>) {
          std::vector<std::string> arms;
          for (const auto& a : n.arms) {
            arms.push_back(a.label + "<" + std::string(sort_name(a.sort)) + "." +
                           lkey(a.cont, ctx) + ">");
          }
          std::sort(arms.begin(), arms.end());
          std::string s = "?" + n.partner + "{";
          for (const auto& a : arms) s += a;
          return s + "}";
        } else if constexpr (std::is_same_v<T, LRec>) {
          TScope inner = ctx;
          inner.vars.push_back(n.var);
          return "rec." + lkey(n.body, inner);
        } else if constexpr (std::is_same_v<T, LVar>) {
          return "t:" + ctx.resolve(n.name);
        } else {
          return "end";
        }
      },
      t->node);
}

std::string ekey(const ErasedPtr& e, TScope ctx) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ESelect> || std::is_same_v<T, EBranch>) {
          std::vector<std::string> arms;
          for (const auto& a : n.arms) {
            arms.push_back(a.label + "<" + std::string(sort_name(a.sort)) + "." +
                           ekey(a.cont, ctx) + ">");
          }
          std::sort(arms.begin(), arms.end());
          std::string s = (std::is_same_v<T, ESelect> ? "!" : "?") + n.partner + "{";
          for (const auto& a : arms) s += a;
          return s + "}";
        } else if constexpr (std::is_same_v<T, ERec>) {
          TScope inner = ctx;
          inner.vars.push_back(n.var);
          return "rec." + ekey(n.body, inner);
        } else if constexpr (std::is_same_v<T, EVar>) {
          return "t:" + ctx.resolve(n.name);
        } else {
          return "end";
        }
      },
      e->node);
}

}  // namespace

std::string canonical_key(const GlobalPtr& g) {
  return gkey(g, TScope{});
}
std::string canonical_key(const LocalPtr& t) {
  return lkey(t, TScope{});
}
std::string canonical_key(const ErasedPtr& e) {
  return ekey(e, TScope{});
}

}  // namespace mpst

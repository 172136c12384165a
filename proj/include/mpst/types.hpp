#pragma once

#include "mpst/rational.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace mpst {

using Name = std::string;

// Closed interval [lo, hi] within [0,1]. A point probability is lo == hi.
struct ImpreciseProb {
  Rational lo;
  Rational hi;

  bool contains(const Rational& p) const { return lo <= p && p <= hi; }
  bool valid() const { return lo >= 0 && lo <= hi && hi <= 1; }
  friend bool operator==(const ImpreciseProb&, const ImpreciseProb&) = default;
};

enum class Sort { Nat, Int, Bool, Str };

const char* sort_name(Sort s);

struct GlobalType;
using GlobalPtr = std::shared_ptr<const GlobalType>;

struct GlobalArm {
  ImpreciseProb delta;
  Name label;
  Sort sort;
  GlobalPtr cont;
};

// r1 -> r2 { delta_i : l_i(S_i). G_i }; invariant: from != to, labels distinct.
struct GInteraction {
  Name from;
  Name to;
  std::vector<GlobalArm> arms;
};
// rec t . body; invariant: body is not the bare variable t and t is guarded.
struct GRec {
  Name var;
  GlobalPtr body;
};
struct GVar {
  Name name;
};
struct GEnd {};

struct GlobalType {
  std::variant<GInteraction, GRec, GVar, GEnd> node;
};

GlobalPtr g_interaction(Name from, Name to, std::vector<GlobalArm> arms);
GlobalPtr g_rec(Name var, GlobalPtr body);
GlobalPtr g_var(Name name);
GlobalPtr g_end();

struct LocalType;
using LocalPtr = std::shared_ptr<const LocalType>;

struct SelectArm {
  ImpreciseProb delta;
  Name label;
  Sort sort;
  LocalPtr cont;
};
struct BranchArm {
  Name label;
  Sort sort;
  LocalPtr cont;
};

// partner (+) { delta_i : !l_i(S_i). T_i }
struct LSelect {
  Name partner;
  std::vector<SelectArm> arms;
};
// partner & { ?l_i(S_i). T_i }
struct LBranch {
  Name partner;
  std::vector<BranchArm> arms;
};
struct LRec {
  Name var;
  LocalPtr body;
};
struct LVar {
  Name name;
};
struct LEnd {};

struct LocalType {
  std::variant<LSelect, LBranch, LRec, LVar, LEnd> node;
};

LocalPtr l_select(Name partner, std::vector<SelectArm> arms);
LocalPtr l_branch(Name partner, std::vector<BranchArm> arms);
LocalPtr l_rec(Name var, LocalPtr body);
LocalPtr l_var(Name name);
LocalPtr l_end();

// Local-type shape with the interval annotations dropped.
struct ErasedType;
using ErasedPtr = std::shared_ptr<const ErasedType>;

struct ErasedArm {
  Name label;
  Sort sort;
  ErasedPtr cont;
};
struct ESelect {
  Name partner;
  std::vector<ErasedArm> arms;
};
struct EBranch {
  Name partner;
  std::vector<ErasedArm> arms;
};
struct ERec {
  Name var;
  ErasedPtr body;
};
struct EVar {
  Name name;
};
struct EEnd {};

struct ErasedType {
  std::variant<ESelect, EBranch, ERec, EVar, EEnd> node;
};

// Canonical keys: alpha-invariant (rec variables as scope levels), arm order
// normalized by label sorting. Equality of keys is syntactic equality up to
// alpha; equi-recursive equality lives in typesys.hpp.
std::string canonical_key(const GlobalPtr& g);
std::string canonical_key(const LocalPtr& t);
std::string canonical_key(const ErasedPtr& e);

std::string interval_string(const ImpreciseProb& d);

}  // namespace mpst

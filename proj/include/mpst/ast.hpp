#pragma once

#include "mpst/types.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mpst {

// Session-name occurrence in value position (delegation payload).
struct SessionRef {
  Name name;
  friend bool operator==(const SessionRef&, const SessionRef&) = default;
  auto operator<=>(const SessionRef&) const = default;
};

// Bare identifier or quoted string in value position. Doubles as a variable
// occurrence: substitution replaces a StrVal whose text is in its domain.
struct StrVal {
  Name text;
  friend bool operator==(const StrVal&, const StrVal&) = default;
  auto operator<=>(const StrVal&) const = default;
};

using Value = std::variant<SessionRef, bool, std::int64_t, StrVal>;

// Channel: a bare name (variable, role == nullopt) or name[role]. The name of
// a name[role] form may itself be a variable awaiting substitution.
struct Channel {
  Name name;
  std::optional<Name> role;

  friend bool operator==(const Channel&, const Channel&) = default;
  auto operator<=>(const Channel&) const = default;
  std::string display() const { return role ? name + "[" + *role + "]" : name; }
};

struct Process;
using ProcPtr = std::shared_ptr<const Process>;

struct SelectArmP {
  Rational prob;
  Name label;
  Value payload;
  ProcPtr cont;
};
struct BranchArmP {
  Name label;
  Name binder;  // bound in cont
  ProcPtr cont;
};

// chan towards partner, internal choice: chan[partner](+){ p_i: l_i(v_i). P_i }
struct PSelect {
  Channel chan;
  Name partner;
  std::vector<SelectArmP> arms;
};
// chan from partner, external choice: chan[partner]&{ l_i(x_i). P_i }
struct PBranch {
  Channel chan;
  Name partner;
  std::vector<BranchArmP> arms;
};
// new session . body, optionally annotated with a global type.
struct PRestrict {
  Name session;
  GlobalPtr annotation;  // may be null
  ProcPtr body;
};
// def name(params) = body in scope; name is bound in body and scope,
// params are bound in body.
struct PDef {
  Name name;
  std::vector<Name> params;
  ProcPtr body;
  ProcPtr scope;
};
using CallArg = std::variant<Value, Channel>;
struct PCall {
  Name name;
  std::vector<CallArg> args;
};
struct PNil {};
struct PPar {
  ProcPtr left;
  ProcPtr right;
};

struct Process {
  std::variant<PSelect, PBranch, PRestrict, PDef, PCall, PNil, PPar> node;
};

ProcPtr p_select(Channel chan, Name partner, std::vector<SelectArmP> arms);
ProcPtr p_branch(Channel chan, Name partner, std::vector<BranchArmP> arms);
ProcPtr p_restrict(Name session, ProcPtr body, GlobalPtr annotation = nullptr);
ProcPtr p_def(Name name, std::vector<Name> params, ProcPtr body, ProcPtr scope);
ProcPtr p_call(Name name, std::vector<CallArg> args);
ProcPtr p_nil();
ProcPtr p_par(ProcPtr left, ProcPtr right);

bool is_nil(const ProcPtr& p);

// Free/bound occurrence analysis.
struct BinderReport {
  std::set<Channel> free_channels;    // fc: channel occurrences not nu/def-bound
  std::set<Name> free_vars;           // fv: free names in variable or session-name position
  std::set<Name> free_proc_vars;      // fpv
  std::set<Name> declared_proc_vars;  // dpv: names declared by any def in the term
};

BinderReport binder_report(const ProcPtr& p);

// Free names of the term in any position other than roles and labels
// (sessions, variables, process variables). Used for fresh-name generation.
std::set<Name> all_names(const ProcPtr& p);

// Session names occurring free anywhere (channel slot or SessionRef value);
// side conditions of scope extrusion quantify over these.
std::set<Name> free_session_names(const ProcPtr& p);

struct SubstError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Subst = std::map<Name, std::variant<Value, Channel>>;

// Capture-avoiding simultaneous substitution. Replaces free occurrences of
// each domain identifier in channel, session-slot and value positions.
// Throws SubstError when a replacement cannot inhabit the occurrence position
// (e.g. an integer substituted where a channel is required).
ProcPtr substitute(const ProcPtr& p, const Subst& subst);

// Binds params to args pairwise. Throws SubstError("arity mismatch ...") when
// the lengths differ; (Call) relies on this check.
Subst bind_params(const std::vector<Name>& params, const std::vector<CallArg>& args,
                  const Name& proc_name);

// Alpha-aware structural equality: identical up to consistent renaming of
// bound identifiers; arm order within a choice is irrelevant; parallel
// composition order is significant (normal_form canonicalizes it).
bool struct_equal(const ProcPtr& a, const ProcPtr& b);

// Total order on processes used for canonical sorting; alpha-invariant.
// struct_equal(a, b) iff canonical_key(a) == canonical_key(b).
std::string canonical_key(const ProcPtr& p);

}  // namespace mpst

#include "mpst/step.hpp"

#include "mpst/congruence.hpp"
#include "mpst/print.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>

namespace mpst {

std::string label_string(const TransitionLabel& l) {
  if (std::holds_alternative<EpsLabel>(l)) return "eps";
  const auto& c = std::get<CommLabel>(l);
  return c.from + "->" + c.to + ":" + c.label;
}

namespace {

struct NuB {
  Name name;
  GlobalPtr anno;
};
struct DefB {
  Name name;
  std::vector<Name> params;
  ProcPtr body;
};
using Binder = std::variant<NuB, DefB>;

void flatten_par(const ProcPtr& p, std::vector<ProcPtr>& out) {
  if (const auto* par = std::get_if<PPar>(&p->node)) {
    flatten_par(par->left, out);
    flatten_par(par->right, out);
    return;
  }
  if (is_nil(p)) return;
  out.push_back(p);
}

ProcPtr rebuild(const std::vector<Binder>& binders, const std::vector<ProcPtr>& atoms) {
  ProcPtr core = p_nil();
  bool first = true;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    core = first ? *it : p_par(*it, core);
    first = false;
  }
  for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
    if (const auto* nu = std::get_if<NuB>(&*it)) {
      core = p_restrict(nu->name, core, nu->anno);
    } else {
      const auto& d = std::get<DefB>(*it);
      core = p_def(d.name, d.params, d.body, core);
    }
  }
  return core;
}

struct ComRedex {
  std::size_t sel;
  std::size_t bra;
};
struct CallRedex {
  std::size_t idx;
  const DefB* def;
};

// The normal form is a binder prefix over a flat parallel of choice and call
// atoms; all redex detection works on that shape.
struct Analysis {
  std::vector<Binder> binders;
  std::vector<ProcPtr> atoms;
  std::vector<ComRedex> coms;
  std::vector<CallRedex> calls;
  std::vector<StepDiagnostic> diagnostics;
};

Analysis analyze(const ProcPtr& p) {
  Analysis a;
  ProcPtr cur = normal_form(p);
  for (;;) {
    if (const auto* r = std::get_if<PRestrict>(&cur->node)) {
      a.binders.push_back(NuB{r->session, r->annotation});
      cur = r->body;
      continue;
    }
    if (const auto* d = std::get_if<PDef>(&cur->node)) {
      a.binders.push_back(DefB{d->name, d->params, d->body});
      cur = d->scope;
      continue;
    }
    break;
  }
  flatten_par(cur, a.atoms);

  std::map<Name, const DefB*> defs;
  for (const auto& b : a.binders) {
    if (const auto* d = std::get_if<DefB>(&b)) defs[d->name] = d;
  }

  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    const auto* sel = std::get_if<PSelect>(&a.atoms[i]->node);
    if (sel != nullptr && sel->chan.role) {
      for (std::size_t j = 0; j < a.atoms.size(); ++j) {
        if (j == i) continue;
        const auto* bra = std::get_if<PBranch>(&a.atoms[j]->node);
        if (bra == nullptr || !bra->chan.role) continue;
        if (sel->chan.name != bra->chan.name) continue;
        if (sel->partner != *bra->chan.role) continue;
        if (bra->partner != *sel->chan.role) continue;
        std::vector<Name> missing;
        for (const auto& arm : sel->arms) {
          bool found = false;
          for (const auto& offer : bra->arms) {
            if (offer.label == arm.label) {
              found = true;
              break;
            }
          }
          if (!found) missing.push_back(arm.label);
        }
        if (missing.empty()) {
          a.coms.push_back(ComRedex{i, j});
        } else {
          std::ostringstream os;
          os << "selection at " << sel->chan.display() << " towards " << sel->partner
             << " uses label";
          if (missing.size() > 1) os << "s";
          for (std::size_t k = 0; k < missing.size(); ++k)
            os << (k == 0 ? " " : ", ") << missing[k];
          os << " not offered by the matching branch";
          a.diagnostics.push_back({"comm-mismatch", os.str()});
        }
      }
      continue;
    }
    const auto* call = std::get_if<PCall>(&a.atoms[i]->node);
    if (call != nullptr) {
      auto it = defs.find(call->name);
      if (it == defs.end()) continue;  // free process variable: inert, not an error
      if (it->second->params.size() != call->args.size()) {
        std::ostringstream os;
        os << "call " << call->name << " passes " << call->args.size()
           << " argument" << (call->args.size() == 1 ? "" : "s") << " but the definition takes "
           << it->second->params.size();
        a.diagnostics.push_back({"arity-mismatch", os.str()});
        continue;
      }
      a.calls.push_back(CallRedex{i, it->second});
    }
  }
  return a;
}

// Sum of the declared probabilities of an enabled selection must be 1;
// anything else makes the step distribution meaningless.
void check_choice_sums(const Analysis& a) {
  for (const auto& r : a.coms) {
    const auto& sel = std::get<PSelect>(a.atoms[r.sel]->node);
    Rational sum = 0;
    for (const auto& arm : sel.arms) sum += arm.prob;
    if (sum != 1) {
      std::ostringstream os;
      os << "probabilities of the enabled selection at " << sel.chan.display() << " towards "
         << sel.partner << " sum to " << rational_string(sum) << ", expected 1";
      throw StepError("ill-formed-choice", os.str());
    }
  }
}

RawStepResult raw_steps(const Analysis& a) {
  RawStepResult out;
  out.diagnostics = a.diagnostics;
  const int m = static_cast<int>(a.coms.size() + a.calls.size());
  if (m == 0) return out;
  check_choice_sums(a);

  for (const auto& r : a.coms) {
    const auto& sel = std::get<PSelect>(a.atoms[r.sel]->node);
    const auto& bra = std::get<PBranch>(a.atoms[r.bra]->node);
    for (const auto& arm : sel.arms) {
      const BranchArmP* offer = nullptr;
      for (const auto& o : bra.arms) {
        if (o.label == arm.label) {
          offer = &o;
          break;
        }
      }
      // analyze() only admits redexes whose selection labels are all offered
      Subst sub;
      sub[offer->binder] = arm.payload;
      ProcPtr received = substitute(offer->cont, sub);
      std::vector<ProcPtr> atoms = a.atoms;
      atoms[r.sel] = arm.cont;
      atoms[r.bra] = received;
      RawStep st;
      st.label = CommLabel{*sel.chan.role, sel.partner, arm.label};
      st.branch_prob = arm.prob;
      st.prob = arm.prob / m;
      st.target = normal_form(rebuild(a.binders, atoms));
      out.steps.push_back(std::move(st));
    }
  }
  for (const auto& r : a.calls) {
    const auto& call = std::get<PCall>(a.atoms[r.idx]->node);
    Subst sub = bind_params(r.def->params, call.args, call.name);
    std::vector<ProcPtr> atoms = a.atoms;
    atoms[r.idx] = substitute(r.def->body, sub);
    RawStep st;
    st.label = EpsLabel{};
    st.branch_prob = 1;
    st.prob = Rational(1) / m;
    st.target = normal_form(rebuild(a.binders, atoms));
    out.steps.push_back(std::move(st));
  }
  return out;
}

}  // namespace

int next_proc(const ProcPtr& p) {
  Analysis a = analyze(p);
  return static_cast<int>(a.coms.size() + a.calls.size());
}

RawStepResult enabled_steps_raw(const ProcPtr& p) { return raw_steps(analyze(p)); }

StepResult enabled_steps(const ProcPtr& p) {
  RawStepResult raw = raw_steps(analyze(p));
  StepResult out;
  out.diagnostics = std::move(raw.diagnostics);
  std::map<std::pair<std::string, std::string>, Step> merged;
  for (auto& st : raw.steps) {
    auto key = std::make_pair(label_string(st.label), canonical_key(st.target));
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(std::move(key), Step{st.label, st.prob, st.target});
    } else {
      it->second.prob += st.prob;
    }
  }
  for (auto& [key, st] : merged) out.steps.push_back(std::move(st));
  return out;
}

}  // namespace mpst

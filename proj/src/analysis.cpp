#include "mpst/analysis.hpp"

#include "mpst/congruence.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <utility>

namespace mpst {

Rational EvolutionPath::probability() const {
  Rational p = 1;
  for (const auto& st : steps) p *= st.prob;
  return p;
}

std::size_t explosion_cap() {
  if (const char* env = std::getenv("MPST_EXPLOSION_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 100000;
}

ExplosionGuard::ExplosionGuard(std::size_t limit_)
    : std::runtime_error("state-space cap of " + std::to_string(limit_) +
                         " exceeded; raise the cap to continue"),
      limit(limit_) {}

namespace {

// Lazily expanded transition graph over congruence classes. States are keyed
// by the canonical print of their normal form; step targets arrive already
// normalized, so registering them is a single key computation.
class Chain {
 public:
  explicit Chain(std::size_t cap) : cap_(cap) {}

  struct Node {
    ProcPtr state;  // normal form
    bool expanded = false;
    bool stuck = false;
    std::vector<Step> steps;              // merged, probs sum to 1 when enabled
    std::vector<std::string> target_keys;  // parallel with steps
  };

  // Registers an already-normalized state and returns its key.
  std::string add_normal(ProcPtr nf) {
    std::string key = canonical_key(nf);
    auto it = nodes_.find(key);
    if (it == nodes_.end()) {
      if (nodes_.size() >= cap_) throw ExplosionGuard(cap_);
      nodes_.emplace(key, Node{std::move(nf), false, false, {}, {}});
    }
    return key;
  }

  std::string add_root(const ProcPtr& p) { return add_normal(normal_form(p)); }

  const Node& at(const std::string& key) {
    Node& n = nodes_.at(key);
    if (!n.expanded) {
      auto res = enabled_steps(n.state);
      n.steps = std::move(res.steps);
      n.stuck = n.steps.empty();
      n.target_keys.reserve(n.steps.size());
      for (const auto& st : n.steps) n.target_keys.push_back(add_normal(st.target));
      n.expanded = true;
    }
    return n;
  }

 private:
  std::size_t cap_;
  std::map<std::string, Node> nodes_;
};

}  // namespace

std::vector<EvolutionPath> enumerate_paths(const ProcPtr& p, int depth,
                                           const AnalysisLimits& limits) {
  if (depth < 1) throw std::invalid_argument("path depth must be positive");
  Chain chain(limits.cap);
  std::string root = chain.add_root(p);
  ProcPtr origin = chain.at(root).state;

  std::vector<EvolutionPath> out;
  std::vector<Step> prefix;
  auto emit = [&] {
    if (out.size() >= limits.cap) throw ExplosionGuard(limits.cap);
    out.push_back(EvolutionPath{origin, prefix});
  };
  auto walk = [&](auto&& self, const std::string& key) -> void {
    const Chain::Node& n = chain.at(key);
    if (n.stuck || prefix.size() == static_cast<std::size_t>(depth)) {
      emit();
      return;
    }
    for (std::size_t i = 0; i < n.steps.size(); ++i) {
      prefix.push_back(n.steps[i]);
      self(self, n.target_keys[i]);
      prefix.pop_back();
    }
  };
  walk(walk, root);
  return out;
}

std::vector<ReachEntry> reach(const ProcPtr& p, int k, const AnalysisLimits& limits) {
  if (k < 1) throw std::invalid_argument("step count must be positive");
  Chain chain(limits.cap);
  std::string root = chain.add_root(p);
  if (chain.at(root).stuck) return {};

  std::map<std::string, Rational> dist;
  {
    const Chain::Node& rn = chain.at(root);
    for (std::size_t i = 0; i < rn.steps.size(); ++i)
      dist[rn.target_keys[i]] += rn.steps[i].prob;
  }
  for (int round = 2; round <= k; ++round) {
    std::map<std::string, Rational> next;
    for (const auto& [key, mass] : dist) {
      const Chain::Node& n = chain.at(key);
      if (n.stuck) {
        next[key] += mass;
      } else {
        for (std::size_t i = 0; i < n.steps.size(); ++i)
          next[n.target_keys[i]] += mass * n.steps[i].prob;
      }
    }
    dist = std::move(next);
  }

  std::vector<ReachEntry> out;
  out.reserve(dist.size());
  for (const auto& [key, mass] : dist) {
    const Chain::Node& n = chain.at(key);
    out.push_back(ReachEntry{n.state, mass, n.stuck});
  }
  std::stable_sort(out.begin(), out.end(), [](const ReachEntry& a, const ReachEntry& b) {
    return a.mass > b.mass;
  });
  return out;
}

std::optional<Rational> total_probability(const ProcPtr& p, int k,
                                          const AnalysisLimits& limits) {
  auto entries = reach(p, k, limits);
  if (entries.empty()) return std::nullopt;
  Rational sum = 0;
  for (const auto& e : entries) sum += e.mass;
  return sum;
}

namespace {

// SplitMix64. Each trial draws from its own stream whose initial state is
// the finalizer applied to seed + (trial + 1) * golden gamma, so trials are
// independent of execution order.
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t sm_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct SplitMix64 {
  std::uint64_t state;
  SplitMix64(std::uint64_t seed, std::uint64_t trial)
      : state(sm_finalize(seed + (trial + 1) * kGamma)) {}
  std::uint64_t next() {
    state += kGamma;
    return sm_finalize(state);
  }
};

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

SimReport simulate(const ProcPtr& p, std::uint64_t trials, std::uint64_t seed,
                   const SimOptions& opts) {
  SimReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.step_cap = opts.step_cap;

  Chain chain(std::numeric_limits<std::size_t>::max());
  std::string root = chain.add_root(p);

  const Rational two_to_64 = Rational(std::numeric_limits<std::uint64_t>::max()) + 1;
  std::map<std::pair<std::size_t, std::string>, std::uint64_t> counts;

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(seed, trial);
    std::string key = root;
    for (std::size_t d = 0; d < opts.step_cap; ++d) {
      const Chain::Node& n = chain.at(key);
      if (n.stuck) {
        ++rep.quiescent;
        break;
      }
      Rational threshold = Rational(rng.next()) / two_to_64;
      std::size_t pick = n.steps.size() - 1;
      Rational cum = 0;
      for (std::size_t i = 0; i < n.steps.size(); ++i) {
        cum += n.steps[i].prob;
        if (threshold < cum) {
          pick = i;
          break;
        }
      }
      ++counts[{d, label_string(n.steps[pick].label)}];
      key = n.target_keys[pick];
    }
  }

  rep.label_freq.reserve(counts.size());
  for (const auto& [dk, c] : counts)
    rep.label_freq.push_back(LabelCount{dk.first, dk.second, c});

  // First-step audit against the declared distribution, and against the
  // reference type's root arms when one was supplied.
  const Chain::Node& rn = chain.at(root);
  const GInteraction* head = nullptr;
  if (opts.reference) {
    const GlobalType* g = opts.reference.get();
    while (const auto* rec = std::get_if<GRec>(&g->node)) g = rec->body.get();
    head = std::get_if<GInteraction>(&g->node);
  }
  for (const auto& st : rn.steps) {
    AuditRow row;
    row.label = label_string(st.label);
    row.declared = st.prob;
    auto it = counts.find({0, row.label});
    row.count = it == counts.end() ? 0 : it->second;
    double n = trials == 0 ? 1.0 : static_cast<double>(trials);
    row.empirical = static_cast<double>(row.count) / n;
    double pd = to_double(st.prob);
    row.margin = 3.0 * std::sqrt(pd * (1.0 - pd) / n);
    row.within_declared = std::fabs(row.empirical - pd) <= row.margin;
    if (head != nullptr) {
      if (const auto* comm = std::get_if<CommLabel>(&st.label);
          comm != nullptr && comm->from == head->from && comm->to == head->to) {
        for (const auto& arm : head->arms) {
          if (arm.label == comm->label) {
            row.delta = arm.delta;
            row.within_delta = row.empirical >= to_double(arm.delta.lo) - row.margin &&
                               row.empirical <= to_double(arm.delta.hi) + row.margin;
          }
        }
      }
    }
    row.pass = row.within_declared && row.within_delta.value_or(true);
    rep.audit.push_back(std::move(row));
  }
  return rep;
}

}  // namespace mpst

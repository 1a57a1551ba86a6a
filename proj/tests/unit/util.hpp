#pragma once

#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lockctl/errors.hpp"
#include "lockctl/io.hpp"
#include "lockctl/model.hpp"

namespace unit {

using namespace lockctl;

// Error code thrown by `f`, or none.
template <class F>
std::optional<Errc> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Strategy allow_all(const Lss& lss, Annotation mode, bool locally_live = false) {
  return Strategy{mode, locally_live, std::vector<LocalStrategy>(lss.processes.size())};
}

// One transition per entry: {src, action, op, dst}; every action uncontrollable unless
// listed in `controllable`.
struct Edge {
  std::string src, action;
  Op op;
  std::string dst;
};

struct ProcSpec {
  std::string id;
  std::vector<std::string> states;
  std::vector<Edge> edges;
  std::set<std::string> controllable;
};

inline Lss make_lss(const std::vector<std::string>& locks, const std::vector<ProcSpec>& procs) {
  LssBuilder b;
  for (const auto& t : locks) b.add_lock(t);
  for (const auto& spec : procs) {
    int p = b.add_process(spec.id);
    for (const auto& s : spec.states) b.add_state(p, s);
    b.set_init(p, spec.states.front());
    for (const auto& e : spec.edges) b.add_transition(p, e.src, e.action, e.op, e.dst, spec.controllable.count(e.action) > 0);
  }
  return b.build();
}

// Uncontrollable cycle s0 -get a-> s1 -get b-> s2 -rel b-> s3 -rel a-> s0.
inline ProcSpec forced_chain(const std::string& id, int a, int b) {
  return {id,
          {"s0", "s1", "s2", "s3"},
          {{"s0", "ga", Op::get(a), "s1"},
           {"s1", "gb", Op::get(b), "s2"},
           {"s2", "rb", Op::rel(b), "s3"},
           {"s3", "ra", Op::rel(a), "s0"}},
          {}};
}

inline RunStep step_of(const Lss& lss, const std::string& proc, const std::string& action) {
  int p = lss.process_index(proc);
  const Process& pr = lss.processes.at(p);
  int a = pr.action_index(action);
  for (const auto& t : pr.transitions) {
    if (t.action == a) return RunStep{p, a, t.op};
  }
  return RunStep{p, a, Op::nop()};
}

// Positional strategy choosing a random subset of the controllable actions available at
// every reachable annotated state.
inline Strategy random_strategy(std::mt19937_64& rng, const Lss& lss, Annotation mode) {
  Strategy s = allow_all(lss, mode);
  std::bernoulli_distribution keep(0.6);
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    AnnotatedProcess ap = annotate(p, mode);
    for (std::size_t n = 0; n < ap.nodes.size(); ++n) {
      ActionSet mask = 0;
      for (const auto& e : ap.out[n]) {
        int a = p.transitions[e.transition].action;
        if (p.controllable[a] && keep(rng)) mask |= ActionSet{1} << a;
      }
      s.local[i].exact[ap.nodes[n]] = mask;
    }
  }
  return s;
}

// Length of a shortest run into a configuration with no enabled step, by plain BFS.
inline std::optional<std::size_t> shortest_deadlock(const Lss& lss, const Strategy& s) {
  GlobalConfig init = initial_config(lss, s.mode);
  std::set<GlobalConfig> seen{init};
  std::vector<GlobalConfig> layer{init};
  for (std::size_t depth = 0; !layer.empty(); ++depth) {
    std::vector<GlobalConfig> next;
    for (const auto& cfg : layer) {
      auto en = enabled(lss, cfg, s);
      if (en.empty()) return depth;
      for (const auto& r : en) {
        GlobalConfig succ = step(lss, cfg, r.proc, r.action, s.mode);
        if (seen.insert(succ).second) next.push_back(std::move(succ));
      }
    }
    layer = std::move(next);
  }
  return std::nullopt;
}

inline LockSet locks_of(std::initializer_list<int> ts) {
  LockSet s;
  for (int t : ts) s.insert(t);
  return s;
}

}  // namespace unit

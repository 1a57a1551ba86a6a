#include "lockctl/oracle.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <unordered_map>

namespace lockctl {

namespace {

// A process graph plus, per node, the bitmask of allowed entries of `out`.
struct View {
  const Process* proc = nullptr;
  const AnnotatedProcess* ap = nullptr;
  const std::vector<std::uint64_t>* mask = nullptr;  // null: everything allowed

  std::uint64_t allowed(int node) const {
    if (!mask) return ~std::uint64_t{0};
    return (*mask)[node];
  }
};

struct Exploration {
  bool dead = false;
  Run trace;
  std::size_t states = 0;
};

struct Parent {
  std::uint64_t prev = 0;
  int proc = -1;
  int transition = -1;
};

Exploration explore(std::span<const View> views, std::size_t max_states) {
  const std::size_t n = views.size();
  std::vector<std::uint64_t> stride(n);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    stride[i] = total;
    std::uint64_t size = views[i].ap->nodes.size();
    if (__builtin_mul_overflow(total, size, &total)) {
      throw Error(Errc::limit_exceeded, "product state space does not fit a 64-bit key");
    }
  }
  auto node_of = [&](std::uint64_t key, std::size_t i) {
    return static_cast<int>((key / stride[i]) % views[i].ap->nodes.size());
  };

  // Calls f(proc, edge) for every step enabled in `key`.
  auto for_each_enabled = [&](std::uint64_t key, auto&& f) {
    LockSet taken;
    for (std::size_t i = 0; i < n; ++i) taken |= views[i].ap->nodes[node_of(key, i)].owned;
    for (std::size_t i = 0; i < n; ++i) {
      int node = node_of(key, i);
      const auto& out = views[i].ap->out[node];
      std::uint64_t allow = views[i].allowed(node);
      for (std::size_t e = 0; e < out.size(); ++e) {
        if (!((allow >> e) & 1U)) continue;
        const Op& op = views[i].proc->transitions[out[e].transition].op;
        if (op.is_get() && taken.contains(op.lock)) continue;
        if (!f(i, out[e])) return;
      }
    }
  };
  auto is_dead = [&](std::uint64_t key) {
    bool any = false;
    for_each_enabled(key, [&](std::size_t, const AnnotatedEdge&) {
      any = true;
      return false;
    });
    return !any;
  };

  Exploration result;
  std::unordered_map<std::uint64_t, Parent> parent;
  std::deque<std::uint64_t> queue;
  parent.emplace(0, Parent{});
  queue.push_back(0);
  std::optional<std::uint64_t> dead;
  if (is_dead(0)) dead = 0;

  while (!dead && !queue.empty()) {
    std::uint64_t key = queue.front();
    queue.pop_front();
    for_each_enabled(key, [&](std::size_t i, const AnnotatedEdge& edge) {
      std::uint64_t next = key + (static_cast<std::uint64_t>(edge.dst) - node_of(key, i)) * stride[i];
      auto [it, fresh] = parent.emplace(next, Parent{key, static_cast<int>(i), edge.transition});
      if (!fresh) return true;
      if (parent.size() > max_states) {
        throw Error(Errc::limit_exceeded, "more than " + std::to_string(max_states) + " product states");
      }
      if (is_dead(next)) {
        dead = next;
        return false;
      }
      queue.push_back(next);
      return true;
    });
  }
  result.states = parent.size();
  if (!dead) return result;

  result.dead = true;
  for (std::uint64_t key = *dead; parent.at(key).proc >= 0;) {
    const Parent& pr = parent.at(key);
    const Transition& t = views[pr.proc].proc->transitions[pr.transition];
    result.trace.push_back(RunStep{pr.proc, t.action, t.op});
    key = pr.prev;
  }
  std::reverse(result.trace.begin(), result.trace.end());
  result.trace = foata_normal_form(result.trace);
  return result;
}

LockSet ownership_of(std::span<const LockSet> ownership, std::size_t i) {
  return i < ownership.size() ? ownership[i] : LockSet{};
}

// Positional strategies on the part of `ap` they make reachable. Each candidate is a
// per-node mask over `out`; nodes the candidate never reaches keep mask 0.
class CandidateEnumerator {
public:
  CandidateEnumerator(const Process& p, const AnnotatedProcess& ap, bool locally_live,
                      std::size_t cap)
      : p_(p), ap_(ap), locally_live_(locally_live), cap_(cap),
        assigned_(ap.nodes.size(), false), mask_(ap.nodes.size(), 0) {}

  std::vector<std::vector<std::uint64_t>> run() {
    recurse();
    return std::move(found_);
  }

private:
  int next_unassigned() const {
    std::vector<bool> seen(ap_.nodes.size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    int best = -1;
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      if (!assigned_[n]) {
        if (best < 0 || n < best) best = n;
        continue;
      }
      const auto& out = ap_.out[n];
      for (std::size_t e = 0; e < out.size(); ++e) {
        if (((mask_[n] >> e) & 1U) && !seen[out[e].dst]) {
          seen[out[e].dst] = true;
          stack.push_back(out[e].dst);
        }
      }
    }
    return best;
  }

  void recurse() {
    int n = next_unassigned();
    if (n < 0) {
      if (found_.size() >= cap_) {
        throw Error(Errc::limit_exceeded, "process '" + p_.id + "' has more than " +
                                              std::to_string(cap_) + " candidate strategies");
      }
      found_.push_back(mask_);
      return;
    }
    const auto& out = ap_.out[n];
    std::uint64_t env = 0;
    std::vector<int> ctrl;
    for (std::size_t e = 0; e < out.size(); ++e) {
      if (p_.controllable[p_.transitions[out[e].transition].action]) {
        ctrl.push_back(static_cast<int>(e));
      } else {
        env |= std::uint64_t{1} << e;
      }
    }
    std::vector<std::uint64_t> subsets;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << ctrl.size()); ++s) subsets.push_back(s);
    std::stable_sort(subsets.begin(), subsets.end(), [](std::uint64_t a, std::uint64_t b) {
      return std::popcount(a) > std::popcount(b);
    });
    assigned_[n] = true;
    for (std::uint64_t s : subsets) {
      std::uint64_t m = env;
      for (std::size_t k = 0; k < ctrl.size(); ++k) {
        if ((s >> k) & 1U) m |= std::uint64_t{1} << ctrl[k];
      }
      if (locally_live_ && m == 0) continue;
      mask_[n] = m;
      recurse();
    }
    mask_[n] = 0;
    assigned_[n] = false;
  }

  const Process& p_;
  const AnnotatedProcess& ap_;
  bool locally_live_;
  std::size_t cap_;
  std::vector<bool> assigned_;
  std::vector<std::uint64_t> mask_;
  std::vector<std::vector<std::uint64_t>> found_;
};

LocalStrategy to_local_strategy(const Process& p, const AnnotatedProcess& ap,
                                const std::vector<std::uint64_t>& mask) {
  LocalStrategy ls;
  // Unreached nodes have no outgoing mask bits; list only nodes the candidate reaches.
  std::vector<bool> seen(ap.nodes.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    ActionSet allow = 0;
    const auto& out = ap.out[n];
    for (std::size_t e = 0; e < out.size(); ++e) {
      if (!((mask[n] >> e) & 1U)) continue;
      int action = p.transitions[out[e].transition].action;
      if (p.controllable[action]) allow |= ActionSet{1} << action;
      if (!seen[out[e].dst]) {
        seen[out[e].dst] = true;
        stack.push_back(out[e].dst);
      }
    }
    ls.exact[ap.nodes[n]] = allow;
  }
  return ls;
}

}  // namespace

Annotation default_annotation(const Lss& lss) {
  if (lss.is_two_lock()) return Annotation::two_lock;
  try {
    for (const auto& p : lss.processes) annotate(p, Annotation::nested);
    return Annotation::nested;
  } catch (const Error& e) {
    if (e.code() != Errc::not_nested) throw;
  }
  return Annotation::owned;
}

void check_locally_live(const Lss& lss, const Strategy& strategy, std::span<const LockSet> ownership) {
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    const LocalStrategy* ls = i < strategy.local.size() ? &strategy.local[i] : nullptr;
    AnnotatedProcess ap = annotate(p, strategy.mode, ownership_of(ownership, i), ls);
    for (std::size_t n = 0; n < ap.nodes.size(); ++n) {
      if (!ap.out[n].empty()) continue;
      std::string run;
      for (int t : ap.run_to(static_cast<int>(n))) run += " " + p.actions[p.transitions[t].action];
      throw Error(Errc::not_locally_live,
                  "process '" + p.id + "' gets stuck in state '" + p.states[ap.nodes[n].base] +
                      "' after:" + (run.empty() ? " (empty run)" : run));
    }
  }
}

OracleVerdict verify_strategy(const Lss& lss, const Strategy& strategy, const Limits& limits,
                              std::span<const LockSet> ownership) {
  if (strategy.locally_live) check_locally_live(lss, strategy, ownership);
  std::vector<AnnotatedProcess> aps;
  aps.reserve(lss.processes.size());
  std::vector<View> views;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const LocalStrategy* ls = i < strategy.local.size() ? &strategy.local[i] : nullptr;
    aps.push_back(annotate(lss.processes[i], strategy.mode, ownership_of(ownership, i), ls));
  }
  for (std::size_t i = 0; i < aps.size(); ++i) views.push_back(View{&lss.processes[i], &aps[i], nullptr});

  OracleVerdict v;
  if (lss.processes.empty()) {
    v.winning = true;
    v.strategy = strategy;
    return v;
  }
  Exploration ex = explore(views, limits.max_states);
  v.states = ex.states;
  v.winning = !ex.dead;
  if (ex.dead) {
    v.trace = std::move(ex.trace);
  } else {
    v.strategy = strategy;
  }
  return v;
}

OracleVerdict exists_winning_oracle(const Lss& lss, const OracleOptions& opts) {
  OracleVerdict v;
  const std::size_t n = lss.processes.size();
  Strategy strategy;
  strategy.mode = opts.mode ? *opts.mode : default_annotation(lss);
  strategy.locally_live = opts.locally_live;
  if (n == 0) {
    v.winning = true;
    v.strategy = strategy;
    return v;
  }
  if (n > opts.limits.max_processes) {
    throw Error(Errc::limit_exceeded, std::to_string(n) + " processes exceed the oracle limit");
  }

  std::vector<AnnotatedProcess> aps;
  for (std::size_t i = 0; i < n; ++i) {
    aps.push_back(annotate(lss.processes[i], strategy.mode, ownership_of(opts.ownership, i)));
  }
  std::vector<std::vector<std::vector<std::uint64_t>>> candidates;
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.push_back(
        CandidateEnumerator(lss.processes[i], aps[i], opts.locally_live, opts.limits.max_candidates).run());
    if (candidates.back().empty()) return v;  // no admissible local strategy at all
    if (__builtin_mul_overflow(combos, candidates.back().size(), &combos) ||
        combos > opts.limits.max_combinations) {
      throw Error(Errc::limit_exceeded, "too many strategy combinations for the oracle");
    }
  }

  std::vector<std::size_t> choice(n, 0);
  std::vector<View> views(n);
  Exploration last;
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      views[i] = View{&lss.processes[i], &aps[i], &candidates[i][choice[i]]};
    }
    Exploration ex = explore(views, opts.limits.max_states);
    if (!ex.dead) {
      v.winning = true;
      v.states = ex.states;
      for (std::size_t i = 0; i < n; ++i) {
        strategy.local.push_back(to_local_strategy(lss.processes[i], aps[i], candidates[i][choice[i]]));
      }
      v.strategy = std::move(strategy);
      return v;
    }
    last = std::move(ex);
    std::size_t k = 0;
    while (k < n && ++choice[k] == candidates[k].size()) choice[k++] = 0;
    if (k == n) break;
  }
  v.states = last.states;
  v.trace = std::move(last.trace);
  return v;
}

Run foata_normal_form(const Run& run) {
  std::vector<int> level(run.size(), 0);
  auto dependent = [](const RunStep& a, const RunStep& b) {
    if (a.proc == b.proc) return true;
    return a.op.kind != OpKind::nop && b.op.kind != OpKind::nop && a.op.lock == b.op.lock;
  };
  for (std::size_t i = 0; i < run.size(); ++i) {
    int lv = 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (dependent(run[i], run[j])) lv = std::max(lv, level[j]);
    }
    level[i] = lv + 1;
  }
  std::vector<std::size_t> order(run.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (level[a] != level[b]) return level[a] < level[b];
    return run[a].proc < run[b].proc;
  });
  Run out;
  out.reserve(run.size());
  for (std::size_t i : order) out.push_back(run[i]);
  return out;
}

}  // namespace lockctl

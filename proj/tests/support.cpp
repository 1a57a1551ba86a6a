#include "support.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace testsupport {

Pattern2 pat(LockSet owns, LockSet blocks, bool strong) { return Pattern2{owns, blocks, strong}; }

PlainGraph plain_graph(const Behavior2& b) {
  PlainGraph g;
  g.proc_locks = b.locks;
  for (LockSet s : b.locks) {
    for (int t : s) g.locks = std::max(g.locks, t + 1);
  }
  g.solid.assign(b.patterns.size(), true);
  g.lockable.assign(b.patterns.size(), {});
  std::map<std::tuple<int, int, int>, std::pair<bool, bool>> seen;  // (from, proc, to) -> (weak, strong)
  for (std::size_t p = 0; p < b.patterns.size(); ++p) {
    for (const auto& x : b.patterns[p]) {
      if (x.owns.empty()) {
        g.solid[p] = false;
        g.lockable[p].push_back(x.blocks);
        continue;
      }
      auto& [weak, strong] = seen[{x.owns.first(), static_cast<int>(p), x.blocks.first()}];
      (x.strong ? strong : weak) = true;
    }
  }
  for (const auto& [key, kinds] : seen) {
    auto [from, proc, to] = key;
    g.edges.push_back(LockEdge{from, proc, to, !kinds.first});
  }
  return g;
}

PlainGraph plain_graph(const LockGraph& lg, std::span<const LockEdge> edges) {
  PlainGraph g;
  g.locks = lg.locks;
  g.proc_locks = lg.proc_locks;
  g.edges.assign(edges.begin(), edges.end());
  g.solid = lg.solid;
  g.lockable = lg.lockable;
  return g;
}

namespace {

bool lockable(const PlainGraph& g, int p, LockSet z) {
  for (LockSet b : g.lockable[p]) {
    if (b.subset_of(z)) return true;
  }
  return false;
}

bool within(const PlainGraph& g, int p, LockSet z) {
  return g.proc_locks[p].size() == 2 && g.proc_locks[p].subset_of(z);
}

bool has_strong_cycle(const PlainGraph& g, const std::map<int, LockEdge>& by_lock) {
  for (const auto& [start, first] : by_lock) {
    // Follow successors; a cycle through `start` closes within |Z| steps.
    int u = start;
    bool strong = true;
    for (std::size_t k = 0; k <= by_lock.size(); ++k) {
      auto it = by_lock.find(u);
      if (it == by_lock.end()) break;
      strong = strong && it->second.strong;
      u = it->second.to;
      if (u == start) {
        if (strong) return true;
        break;
      }
    }
  }
  (void)g;
  return false;
}

}  // namespace

std::optional<std::string> check_scheme(const PlainGraph& g, const DeadlockScheme& s, bool sufficient) {
  std::map<int, LockEdge> by_lock;
  for (const auto& [p, e] : s.ds) {
    if (!within(g, p, s.z)) return "mapped process outside Proc_Z";
    if (e.proc != p) return "edge with a foreign label";
    if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) return "edge not in the graph";
    if (!by_lock.emplace(e.from, e).second) return "two scheme edges leave one lock";
  }
  for (std::size_t p = 0; p < g.proc_locks.size(); ++p) {
    if (within(g, static_cast<int>(p), s.z) && g.solid[p] && !s.ds.count(static_cast<int>(p))) {
      return "unmapped solid process";
    }
  }
  for (int t : s.z) {
    if (!by_lock.count(t)) return "lock of Z without scheme edge";
  }
  if (has_strong_cycle(g, by_lock)) return "strong cycle";
  if (sufficient) {
    for (std::size_t p = 0; p < g.proc_locks.size(); ++p) {
      if (!s.ds.count(static_cast<int>(p)) && !lockable(g, static_cast<int>(p), s.z)) return "process not covered";
    }
  }
  return std::nullopt;
}

std::optional<DeadlockScheme> brute_force_scheme(const PlainGraph& g) {
  const std::size_t n = g.proc_locks.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << g.locks); ++bits) {
    LockSet z = LockSet::from_bits(bits);
    bool covered = true;
    for (std::size_t p = 0; p < n && covered; ++p) {
      if (!within(g, static_cast<int>(p), z)) covered = lockable(g, static_cast<int>(p), z);
    }
    if (!covered) continue;
    std::vector<int> zs(z.begin(), z.end());
    DeadlockScheme s{z, {}};
    std::vector<bool> used(n, false);
    std::function<bool(std::size_t)> place = [&](std::size_t i) -> bool {
      if (i == zs.size()) return !check_scheme(g, s, true).has_value();
      for (const auto& e : g.edges) {
        if (e.from != zs[i] || used[e.proc] || !within(g, e.proc, z)) continue;
        used[e.proc] = true;
        s.ds[e.proc] = e;
        if (place(i + 1)) return true;
        s.ds.erase(e.proc);
        used[e.proc] = false;
      }
      return false;
    };
    if (place(0)) return s;
  }
  return std::nullopt;
}

std::optional<LockEdge> solid_edge_leaving(const PlainGraph& g, LockSet z) {
  for (const auto& e : g.edges) {
    if (g.solid[e.proc] && z.contains(e.from) && !z.contains(e.to)) return e;
  }
  return std::nullopt;
}

std::vector<std::vector<LockEdge>> simple_cycles(const PlainGraph& g) {
  std::vector<std::vector<LockEdge>> out;
  std::vector<LockEdge> path;
  std::set<int> labels;
  LockSet visited;
  std::function<void(int, int)> dfs = [&](int start, int u) {
    for (const auto& e : g.edges) {
      if (e.from != u || labels.count(e.proc)) continue;
      if (e.to == start) {
        path.push_back(e);
        out.push_back(path);
        path.pop_back();
        continue;
      }
      if (e.to < start || visited.contains(e.to)) continue;
      path.push_back(e);
      labels.insert(e.proc);
      visited.insert(e.to);
      dfs(start, e.to);
      visited.erase(e.to);
      labels.erase(e.proc);
      path.pop_back();
    }
  };
  for (int s = 0; s < g.locks; ++s) {
    visited = LockSet::single(s);
    dfs(s, s);
  }
  return out;
}

bool qbf_truth(const QbfInstance& q) {
  for (std::uint32_t x = 0; x < (1U << q.exists); ++x) {
    bool all = true;
    for (std::uint32_t y = 0; y < (1U << q.forall) && all; ++y) {
      bool some = false;
      for (const auto& clause : q.clauses) {
        bool sat = std::all_of(clause.begin(), clause.end(), [&](const Literal& l) {
          bool v = ((l.universal ? y : x) >> l.var) & 1U;
          return v != l.negated;
        });
        some = some || sat;
      }
      all = some;
    }
    if (all) return true;
  }
  return false;
}

std::vector<std::vector<int>> all_stair_cuts(std::span<const Op> run) {
  std::vector<int> gets;
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (run[i].is_get()) gets.push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << gets.size()); ++mask) {
    std::vector<int> cut;
    for (std::size_t k = 0; k < gets.size(); ++k) {
      if ((mask >> k) & 1U) cut.push_back(gets[k]);
    }
    bool ok = true;
    LockSet stairs;
    std::size_t begin = 0;
    for (std::size_t seg = 0; seg <= cut.size() && ok; ++seg) {
      std::size_t end = seg < cut.size() ? static_cast<std::size_t>(cut[seg]) : run.size();
      std::map<int, int> balance;
      for (std::size_t i = begin; i < end && ok; ++i) {
        if (run[i].kind == OpKind::nop) continue;
        if (stairs.contains(run[i].lock)) ok = false;
        balance[run[i].lock] += run[i].is_get() ? 1 : -1;
      }
      for (const auto& [t, b] : balance) ok = ok && b == 0;
      if (seg < cut.size()) {
        stairs.insert(run[cut[seg]].lock);
        begin = end + 1;
      }
    }
    if (ok) out.push_back(cut);
  }
  return out;
}

std::vector<Op> random_nested_run(std::mt19937_64& rng, int locks, int length) {
  std::vector<Op> run;
  std::vector<int> stack;
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<int> lock(0, locks - 1);
  while (static_cast<int>(run.size()) < length) {
    int k = kind(rng);
    if (k < 5) {
      int t = lock(rng);
      if (std::find(stack.begin(), stack.end(), t) != stack.end()) continue;
      stack.push_back(t);
      run.push_back(Op::get(t));
    } else if (k < 9) {
      if (stack.empty()) continue;
      run.push_back(Op::rel(stack.back()));
      stack.pop_back();
    } else {
      run.push_back(Op::nop());
    }
  }
  return run;
}

Behavior2 random_behavior(std::mt19937_64& rng, int locks, int procs) {
  Behavior2 b;
  std::uniform_int_distribution<int> lock(0, locks - 1);
  std::bernoulli_distribution edge(0.45);
  std::bernoulli_distribution fragile(0.12);
  for (int p = 0; p < procs; ++p) {
    int a = lock(rng);
    int c = lock(rng);
    while (c == a) c = lock(rng);
    LockSet la = LockSet::single(a);
    LockSet lc = LockSet::single(c);
    std::vector<Pattern2> ps;
    for (LockSet blocks : {la, lc, la | lc}) {
      if (fragile(rng)) ps.push_back(pat({}, blocks, false));
    }
    for (auto [o, x] : {std::pair{la, lc}, std::pair{lc, la}}) {
      for (bool strong : {false, true}) {
        if (edge(rng)) ps.push_back(pat(o, x, strong));
      }
    }
    std::sort(ps.begin(), ps.end());
    b.locks.push_back(la | lc);
    b.patterns.push_back(std::move(ps));
  }
  return b;
}

Behavior2 figure_behavior() {
  // (from, to, strength of from->to, strength of to->from); locks 0-based.
  struct Pair {
    int a, b;
    bool forward_strong, backward_strong;
  };
  const std::vector<Pair> procs{
      {0, 1, true, true},   // p1
      {1, 2, false, true},  // p2, weak t2 -> t3
      {2, 0, true, true},   // p3
      {3, 4, true, true},   // p4
      {4, 5, false, true},  // p5, weak t5 -> t6
      {5, 3, true, true},   // p6
      {0, 6, true, true},   // p7
      {6, 7, true, true},   // p8
      {7, 4, true, true},   // p9
  };
  Behavior2 b;
  for (const auto& x : procs) {
    LockSet a = LockSet::single(x.a);
    LockSet c = LockSet::single(x.b);
    std::vector<Pattern2> ps{pat(a, c, x.forward_strong), pat(c, a, x.backward_strong)};
    std::sort(ps.begin(), ps.end());
    b.locks.push_back(a | c);
    b.patterns.push_back(ps);
  }
  return b;
}

ReachFixture reach_fixture() {
  Behavior2 b;
  auto both = [&](int x, int y) {
    LockSet a = LockSet::single(x);
    LockSet c = LockSet::single(y);
    std::vector<Pattern2> ps{pat(a, c, true), pat(c, a, true)};
    std::sort(ps.begin(), ps.end());
    b.locks.push_back(a | c);
    b.patterns.push_back(ps);
  };
  both(0, 1);  // p1
  both(1, 2);  // p2
  both(3, 2);  // p3
  both(2, 4);  // p4
  both(5, 1);  // p5
  // p6: fragile, t5 -> t7
  b.locks.push_back(locks_of({4, 6}));
  b.patterns.push_back({pat({}, LockSet::single(6), false), pat(LockSet::single(4), LockSet::single(6), true)});
  std::sort(b.patterns.back().begin(), b.patterns.back().end());
  // p7, p8: a weak two-cycle between t7 and t8
  for (int p = 0; p < 2; ++p) {
    b.locks.push_back(locks_of({6, 7}));
    b.patterns.push_back({pat(LockSet::single(6), LockSet::single(7), false),
                          pat(LockSet::single(7), LockSet::single(6), false)});
    std::sort(b.patterns.back().begin(), b.patterns.back().end());
  }
  ReachFixture f{build_lock_graph(b), {}};
  f.state.h = f.graph.edges;
  f.state.scheme.z = locks_of({6, 7});
  f.state.scheme.ds[6] = *f.graph.find(6, 6, 7);
  f.state.scheme.ds[7] = *f.graph.find(7, 7, 6);
  return f;
}

}  // namespace testsupport

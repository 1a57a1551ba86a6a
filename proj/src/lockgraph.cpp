#include "lockctl/lockgraph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace lockctl {

namespace {

bool edge_order(const LockEdge& a, const LockEdge& b) {
  return std::tie(a.from, a.proc, a.to) < std::tie(b.from, b.proc, b.to);
}

bool by_target(const LockEdge& a, const LockEdge& b) {
  return std::tie(a.to, a.proc) < std::tie(b.to, b.proc);
}

std::vector<LockEdge> out_edges(const SchemeState& s, int t) {
  std::vector<LockEdge> out;
  for (const auto& e : s.h) {
    if (e.from == t) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), by_target);
  return out;
}

bool solo_solid(const LockGraph& g, const SchemeState& s, const LockEdge& e) {
  return g.solid[e.proc] && !s.has(e.to, e.proc, e.from);
}

bool double_solid(const LockGraph& g, const SchemeState& s, const LockEdge& e) {
  return g.solid[e.proc] && s.has(e.to, e.proc, e.from);
}

std::string lock_list(const LockGraph& g, LockSet set) {
  std::string out = "{";
  for (int t : set) out += (out.size() > 1 ? " " : "") + g.lock_names[t];
  return out + "}";
}

std::string cycle_text(const LockGraph& g, const std::vector<LockEdge>& cycle) {
  std::string out;
  for (const auto& e : cycle) {
    out += g.lock_names[e.from] + (e.strong ? " =" : " -") + g.proc_names[e.proc] + (e.strong ? "=> " : "-> ");
  }
  return out + g.lock_names[cycle.front().from];
}

std::vector<LockEdge> reversed(const LockGraph& g, const std::vector<LockEdge>& cycle) {
  std::vector<LockEdge> out;
  for (auto it = cycle.rbegin(); it != cycle.rend(); ++it) {
    const LockEdge* r = g.find(it->to, it->proc, it->from);
    out.push_back(*r);
  }
  return out;
}

// Depth-first search for simple cycles starting and ending at `start`, using only
// vertices above `start` that are outside `avoid`, with pairwise distinct labels.
// Cycles are produced in lexicographic order of (target, label) steps.
class CycleSearch {
public:
  CycleSearch(const LockGraph& g, const SchemeState& s, std::function<bool(const LockEdge&)> usable,
              std::size_t budget)
      : g_(g), s_(s), usable_(std::move(usable)), budget_(budget) {}

  std::optional<std::vector<LockEdge>> first(int start, LockSet avoid,
                                             const std::function<bool(const std::vector<LockEdge>&)>& accept) {
    start_ = start;
    avoid_ = avoid;
    accept_ = &accept;
    path_.clear();
    visited_ = LockSet::single(start);
    labels_.assign(g_.processes(), false);
    if (dfs(start)) return path_;
    return std::nullopt;
  }

private:
  bool dfs(int t) {
    if (++steps_ > budget_) throw Error(Errc::limit_exceeded, "cycle search budget exhausted");
    for (const auto& e : out_edges(s_, t)) {
      if (!usable_(e) || labels_[e.proc]) continue;
      if (e.to == start_) {
        path_.push_back(e);
        if ((*accept_)(path_)) return true;
        path_.pop_back();
        continue;
      }
      if (e.to < start_ || visited_.contains(e.to) || avoid_.contains(e.to)) continue;
      path_.push_back(e);
      visited_.insert(e.to);
      labels_[e.proc] = true;
      if (dfs(e.to)) return true;
      labels_[e.proc] = false;
      visited_.erase(e.to);
      path_.pop_back();
    }
    return false;
  }

  const LockGraph& g_;
  const SchemeState& s_;
  std::function<bool(const LockEdge&)> usable_;
  std::size_t budget_;
  std::size_t steps_ = 0;
  int start_ = 0;
  LockSet avoid_;
  LockSet visited_;
  std::vector<bool> labels_;
  std::vector<LockEdge> path_;
  const std::function<bool(const std::vector<LockEdge>&)>* accept_ = nullptr;
};

// For every lock of `cls` other than `root`, the first edge of its path to `root` along
// double solid edges of H outside Z.
std::map<int, LockEdge> edges_toward(const LockGraph& g, const SchemeState& s, LockSet cls, int root) {
  std::map<int, LockEdge> toward;
  std::deque<int> queue{root};
  LockSet seen = LockSet::single(root);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (const auto& e : s.h) {
      if (e.to != u || !cls.contains(e.from) || seen.contains(e.from)) continue;
      if (!double_solid(g, s, e)) continue;
      seen.insert(e.from);
      toward.emplace(e.from, e);
      queue.push_back(e.from);
    }
  }
  return toward;
}

LockSet class_of(const std::vector<int>& classes, int t) {
  LockSet out;
  for (std::size_t u = 0; u < classes.size(); ++u) {
    if (classes[u] >= 0 && classes[u] == classes[t]) out.insert(static_cast<int>(u));
  }
  return out;
}

// Assigns one edge of H to every lock in `fresh` so that the kept scheme becomes a
// scheme for Z; used when the direct construction double-books a process.
bool complete_scheme(const LockGraph& g, SchemeState& s, LockSet fresh) {
  std::vector<int> locks(fresh.begin(), fresh.end());
  std::vector<bool> used(g.processes(), false);
  for (const auto& [p, e] : s.scheme.ds) used[p] = true;
  std::function<bool(std::size_t)> place = [&](std::size_t i) -> bool {
    if (i == locks.size()) return !scheme_violation(g, s.scheme, false).has_value();
    for (const auto& e : out_edges(s, locks[i])) {
      if (used[e.proc] || !s.scheme.z.contains(e.to)) continue;
      if (!g.proc_locks[e.proc].subset_of(s.scheme.z)) continue;
      used[e.proc] = true;
      s.scheme.ds[e.proc] = e;
      if (place(i + 1)) return true;
      s.scheme.ds.erase(e.proc);
      used[e.proc] = false;
    }
    return false;
  };
  return place(0);
}

std::optional<int> edgeless_solid(const LockGraph& g, const SchemeState& s) {
  for (std::size_t p = 0; p < g.processes(); ++p) {
    if (!g.solid[p]) continue;
    if (std::none_of(s.h.begin(), s.h.end(), [&](const LockEdge& e) { return e.proc == static_cast<int>(p); })) {
      return static_cast<int>(p);
    }
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------

const LockEdge* LockGraph::find(int from, int proc, int to) const {
  LockEdge key{from, proc, to, false};
  auto it = std::lower_bound(edges.begin(), edges.end(), key, edge_order);
  if (it != edges.end() && it->from == from && it->proc == proc && it->to == to) return &*it;
  return nullptr;
}

bool LockGraph::z_lockable(int proc, LockSet z) const {
  return std::any_of(lockable[proc].begin(), lockable[proc].end(), [&](LockSet b) { return b.subset_of(z); });
}

std::string LockGraph::edge_text(const LockEdge& e) const {
  return lock_names[e.from] + (e.strong ? " =" : " -") + proc_names[e.proc] + (e.strong ? "=> " : "-> ") +
         lock_names[e.to];
}

LockGraph build_lock_graph(const Behavior2& b, std::vector<std::string> lock_names,
                           std::vector<std::string> proc_names) {
  LockGraph g;
  int locks = 0;
  for (LockSet s : b.locks) {
    for (int t : s) locks = std::max(locks, t + 1);
  }
  locks = std::max<int>(locks, static_cast<int>(lock_names.size()));
  g.locks = locks;
  g.proc_locks = b.locks;
  const std::size_t n = b.patterns.size();
  g.solid.assign(n, true);
  g.lockable.assign(n, {});
  for (int t = static_cast<int>(lock_names.size()); t < locks; ++t) lock_names.push_back("t" + std::to_string(t + 1));
  for (std::size_t p = proc_names.size(); p < n; ++p) proc_names.push_back("p" + std::to_string(p + 1));
  g.lock_names = std::move(lock_names);
  g.proc_names = std::move(proc_names);

  std::map<std::tuple<int, int, int>, bool> weak;  // (from, proc, to) -> has weak pattern
  for (std::size_t p = 0; p < n; ++p) {
    for (const auto& pat : b.patterns[p]) {
      if (pat.blocks.empty()) {
        throw Error(Errc::not_locally_live_behavior,
                    "process '" + g.proc_names[p] + "' has a pattern that blocks on nothing");
      }
      if (pat.owns.empty()) {
        g.solid[p] = false;
        g.lockable[p].push_back(pat.blocks);
        continue;
      }
      if (pat.owns.size() != 1 || pat.blocks.size() != 1) {
        throw Error(Errc::invalid_argument, "process '" + g.proc_names[p] + "' has a pattern over more than two locks");
      }
      auto key = std::make_tuple(pat.owns.first(), static_cast<int>(p), pat.blocks.first());
      weak[key] = weak[key] || !pat.strong;
    }
  }
  for (const auto& [key, has_weak] : weak) {
    auto [from, proc, to] = key;
    g.edges.push_back(LockEdge{from, proc, to, !has_weak});
  }
  std::sort(g.edges.begin(), g.edges.end(), edge_order);
  return g;
}

std::vector<int> procs_within(const LockGraph& g, LockSet z) {
  std::vector<int> out;
  for (std::size_t p = 0; p < g.processes(); ++p) {
    if (g.proc_locks[p].size() == 2 && g.proc_locks[p].subset_of(z)) out.push_back(static_cast<int>(p));
  }
  return out;
}

std::optional<std::string> scheme_violation(const LockGraph& g, const DeadlockScheme& s, bool sufficient) {
  std::vector<int> inside = procs_within(g, s.z);
  auto is_inside = [&](int p) { return std::find(inside.begin(), inside.end(), p) != inside.end(); };
  std::vector<int> succ(g.locks, -1);
  std::vector<const LockEdge*> out(g.locks, nullptr);
  for (const auto& [p, e] : s.ds) {
    if (!is_inside(p)) return "process " + g.proc_names[p] + " is mapped but does not lie within Z";
    const LockEdge* ge = g.find(e.from, e.proc, e.to);
    if (e.proc != p || !ge) return "process " + g.proc_names[p] + " is mapped to a foreign edge";
    if (out[e.from]) return "lock " + g.lock_names[e.from] + " has two outgoing scheme edges";
    out[e.from] = ge;
    succ[e.from] = e.to;
  }
  for (int p : inside) {
    if (g.solid[p] && !s.ds.count(p)) return "solid process " + g.proc_names[p] + " is unmapped";
  }
  for (int t : s.z) {
    if (!out[t]) return "lock " + g.lock_names[t] + " has no outgoing scheme edge";
  }
  // Scheme edges form a functional graph on Z; inspect each cycle once.
  std::vector<int> color(g.locks, 0);
  for (int t : s.z) {
    int u = t;
    while (u >= 0 && color[u] == 0) {
      color[u] = 1;
      u = succ[u];
    }
    if (u >= 0 && color[u] == 1) {
      bool all_strong = true;
      int v = u;
      do {
        all_strong = all_strong && out[v]->strong;
        v = succ[v];
      } while (v != u);
      if (all_strong) return "scheme contains a strong cycle through " + g.lock_names[u];
    }
    for (u = t; u >= 0 && color[u] == 1; u = succ[u]) color[u] = 2;
  }
  if (sufficient) {
    for (std::size_t p = 0; p < g.processes(); ++p) {
      if (s.ds.count(static_cast<int>(p))) continue;
      if (!g.z_lockable(static_cast<int>(p), s.z)) {
        return "process " + g.proc_names[p] + " is neither mapped nor Z-lockable";
      }
    }
  }
  return std::nullopt;
}

bool SchemeState::has(int from, int proc, int to) const {
  LockEdge key{from, proc, to, false};
  auto it = std::lower_bound(h.begin(), h.end(), key, edge_order);
  return it != h.end() && it->from == from && it->proc == proc && it->to == to;
}

void SchemeState::erase(const LockEdge& e) {
  auto it = std::lower_bound(h.begin(), h.end(), e, edge_order);
  if (it != h.end() && it->from == e.from && it->proc == e.proc && it->to == e.to) h.erase(it);
}

std::vector<int> eqh_classes(const LockGraph& g, const SchemeState& s) {
  std::vector<int> parent(g.locks);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
  for (const auto& e : s.h) {
    if (s.scheme.z.contains(e.from) || s.scheme.z.contains(e.to)) continue;
    if (!double_solid(g, s, e)) continue;
    int a = root(e.from);
    int b = root(e.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> cls(g.locks, -1);
  for (int t = 0; t < g.locks; ++t) {
    if (!s.scheme.z.contains(t)) cls[t] = root(t);
  }
  return cls;
}

std::optional<std::string> invariant_violation(const LockGraph& g, const SchemeState& s) {
  for (const auto& e : s.h) {
    if (g.solid[e.proc] && s.scheme.z.contains(e.from) && !s.scheme.z.contains(e.to)) {
      return "solid edge " + g.edge_text(e) + " leaves Z";
    }
  }
  return scheme_violation(g, s.scheme, false);
}

// ---------------------------------------------------------------------------

StageResult trim(const LockGraph& g, SchemeState& s, std::vector<int> dirty) {
  bool changed = false;
  std::vector<int> stack;
  auto push_all = [&] {
    for (int t = g.locks; t-- > 0;) stack.push_back(t);
  };
  if (dirty.empty()) push_all();
  else stack = std::move(dirty);

  while (true) {
    bool erased_this_round = false;
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      if (s.scheme.z.contains(t)) continue;
      std::vector<LockEdge> outs = out_edges(s, t);
      if (outs.size() < 2) continue;
      auto solo = std::find_if(outs.begin(), outs.end(), [&](const LockEdge& e) { return solo_solid(g, s, e); });
      if (solo == outs.end()) continue;
      LockEdge keep = *solo;
      for (const auto& q : outs) {
        if (q == keep) continue;
        if (solo_solid(g, s, q)) {
          s.trace.push_back("trim: fail at " + g.lock_names[t] + ": " + g.edge_text(keep) + " and " +
                            g.edge_text(q) + " are both solo solid");
          return StageResult::failed;
        }
        s.erase(q);
        s.trace.push_back("trim: erase " + g.edge_text(q));
        stack.push_back(q.to);
        changed = erased_this_round = true;
      }
    }
    if (!erased_this_round && !stack.empty()) continue;
    // Full rescan; stop once a pass finds nothing to do.
    bool pending = false;
    for (int t = 0; t < g.locks && !pending; ++t) {
      if (s.scheme.z.contains(t)) continue;
      std::vector<LockEdge> outs = out_edges(s, t);
      pending = outs.size() >= 2 &&
                std::any_of(outs.begin(), outs.end(), [&](const LockEdge& e) { return solo_solid(g, s, e); });
    }
    if (!pending) break;
    push_all();
  }
  return changed ? StageResult::changed : StageResult::unchanged;
}

StageResult absorb_solid_cycles(const LockGraph& g, SchemeState& s, const SchemeOptions& opts) {
  if (auto p = edgeless_solid(g, s)) {
    s.trace.push_back("solid-cycles: fail, solid " + g.proc_names[*p] + " has no edge");
    return StageResult::failed;
  }
  CycleSearch search(g, s, [&](const LockEdge& e) { return g.solid[e.proc]; }, opts.max_cycles);
  const std::function<bool(const std::vector<LockEdge>&)> any = [](const std::vector<LockEdge>&) { return true; };
  std::vector<std::vector<LockEdge>> batch;
  LockSet used = s.scheme.z;
  for (int start = 0; start < g.locks; ++start) {
    if (used.contains(start)) continue;
    auto cycle = search.first(start, used, any);
    if (!cycle) continue;
    for (const auto& e : *cycle) used.insert(e.from);
    batch.push_back(std::move(*cycle));
  }
  if (batch.empty()) return StageResult::unchanged;

  std::vector<std::vector<LockEdge>> chosen;
  for (const auto& cycle : batch) {
    bool weak = std::any_of(cycle.begin(), cycle.end(), [](const LockEdge& e) { return !e.strong; });
    if (weak) {
      chosen.push_back(cycle);
      continue;
    }
    for (const auto& e : cycle) {
      if (!s.has(e.to, e.proc, e.from)) {
        s.trace.push_back("solid-cycles: fail, strong cycle " + cycle_text(g, cycle) + " lacks the reverse of " +
                          g.edge_text(e));
        return StageResult::failed;
      }
    }
    std::vector<LockEdge> rev = reversed(g, cycle);
    if (std::all_of(rev.begin(), rev.end(), [](const LockEdge& e) { return e.strong; })) {
      s.trace.push_back("solid-cycles: fail, strong cycle " + cycle_text(g, cycle) + " has a strong reversal");
      return StageResult::failed;
    }
    chosen.push_back(std::move(rev));
  }

  LockSet added;
  std::map<int, LockEdge> keep;  // lock -> kept outgoing edge
  for (const auto& cycle : chosen) {
    s.trace.push_back("solid-cycles: absorb " + cycle_text(g, cycle));
    for (const auto& e : cycle) {
      added.insert(e.from);
      keep[e.from] = e;
      s.scheme.ds[e.proc] = e;
    }
  }
  s.scheme.z |= added;
  std::vector<int> dirty;
  for (int t : added) {
    for (const auto& e : out_edges(s, t)) {
      if (e == keep.at(t)) continue;
      s.erase(e);
      dirty.push_back(e.to);
    }
  }
  if (auto p = edgeless_solid(g, s)) {
    s.trace.push_back("solid-cycles: fail, solid " + g.proc_names[*p] + " lost all its edges");
    return StageResult::failed;
  }
  if (trim(g, s, std::move(dirty)) == StageResult::failed) return StageResult::failed;
  return StageResult::changed;
}

StageResult extend_reach(const LockGraph& g, SchemeState& s) {
  bool changed = false;
  while (true) {
    std::optional<LockEdge> entry;
    for (const auto& e : s.h) {
      if (s.scheme.z.contains(e.from) || !s.scheme.z.contains(e.to)) continue;
      if (!entry || std::tie(e.from, e.to, e.proc) < std::tie(entry->from, entry->to, entry->proc)) entry = e;
    }
    if (!entry) break;
    std::vector<int> classes = eqh_classes(g, s);
    LockSet cls = class_of(classes, entry->from);
    std::map<int, LockEdge> toward = edges_toward(g, s, cls, entry->from);
    s.scheme.z |= cls;
    s.scheme.ds[entry->proc] = *entry;
    for (const auto& [t, e] : toward) s.scheme.ds[e.proc] = e;
    s.trace.push_back("reach: add " + lock_list(g, cls) + " via " + g.edge_text(*entry));
    changed = true;
  }
  return changed ? StageResult::changed : StageResult::unchanged;
}

StageResult incorporate_weak_cycles(const LockGraph& g, SchemeState& s, const SchemeOptions& opts) {
  CycleSearch search(g, s, [](const LockEdge&) { return true; }, opts.max_cycles);
  const std::function<bool(const std::vector<LockEdge>&)> has_weak = [](const std::vector<LockEdge>& c) {
    return std::any_of(c.begin(), c.end(), [](const LockEdge& e) { return !e.strong; });
  };
  std::optional<std::vector<LockEdge>> cycle;
  for (int start = 0; start < g.locks && !cycle; ++start) {
    if (s.scheme.z.contains(start)) continue;
    cycle = search.first(start, s.scheme.z, has_weak);
  }
  if (!cycle) return StageResult::unchanged;

  // Rotate so that the cycle ends with its last weak edge.
  std::size_t last_weak = 0;
  for (std::size_t i = 0; i < cycle->size(); ++i) {
    if (!(*cycle)[i].strong) last_weak = i;
  }
  std::rotate(cycle->begin(), cycle->begin() + static_cast<long>(last_weak + 1), cycle->end());

  std::vector<int> classes = eqh_classes(g, s);
  LockSet fresh;
  for (const auto& e : *cycle) fresh |= class_of(classes, e.from);
  LockSet old_z = s.scheme.z;
  DeadlockScheme before = s.scheme;
  s.scheme.z |= fresh;
  s.trace.push_back("weak-cycle: add " + lock_list(g, fresh) + " via " + cycle_text(g, *cycle));

  bool clash = false;
  auto assign = [&](const LockEdge& e) {
    auto [it, inserted] = s.scheme.ds.emplace(e.proc, e);
    if (!inserted && it->second != e) clash = true;
  };
  std::map<int, std::map<int, LockEdge>> toward_cache;
  std::map<int, LockEdge> new_edges;
  for (int t : fresh) {
    int j = -1;
    for (std::size_t i = 0; i < cycle->size(); ++i) {
      if (classes[(*cycle)[i].from] == classes[t]) j = static_cast<int>(i);
    }
    const LockEdge& anchor = (*cycle)[j];
    if (t == anchor.from) {
      assign(anchor);
      continue;
    }
    auto it = toward_cache.find(anchor.from);
    if (it == toward_cache.end()) {
      it = toward_cache.emplace(anchor.from, edges_toward(g, s, class_of(classes, anchor.from), anchor.from)).first;
    }
    assign(it->second.at(t));
  }
  (void)old_z;
  if (clash) {
    s.trace.push_back("weak-cycle: direct orientation double-books a process, searching for another");
    s.scheme.ds = before.ds;
    if (!complete_scheme(g, s, fresh)) {
      throw std::logic_error("no deadlock scheme extends to " + lock_list(g, s.scheme.z));
    }
  }
  return StageResult::changed;
}

SchemeResult decide_sufficient_scheme(const LockGraph& g, const SchemeOptions& opts) {
  SchemeResult result;
  SchemeState& s = result.state;
  s.h = g.edges;

  auto stage = [&](const std::string& name) {
    if (auto bad = invariant_violation(g, s)) {
      throw std::logic_error("invariant broken after " + name + ": " + *bad);
    }
    if (opts.observer) opts.observer(g, s, name);
  };
  auto fail = [&] {
    s.trace.push_back("result: no sufficient deadlock scheme");
    result.failed_early = true;
    return result;
  };

  StageResult r = trim(g, s);
  if (r == StageResult::failed) return fail();
  if (r == StageResult::unchanged) s.trace.push_back("trim: no change");
  stage("trim");

  while (true) {
    r = absorb_solid_cycles(g, s, opts);
    if (r == StageResult::failed) return fail();
    if (r == StageResult::unchanged) break;
    stage("solid-cycles");
  }

  while (true) {
    LockSet z0 = s.scheme.z;
    extend_reach(g, s);
    stage("reach");
    incorporate_weak_cycles(g, s, opts);
    stage("weak-cycle");
    if (s.scheme.z == z0) break;
  }

  for (std::size_t p = 0; p < g.processes(); ++p) {
    std::vector<int> inside = procs_within(g, s.scheme.z);
    if (std::find(inside.begin(), inside.end(), static_cast<int>(p)) != inside.end()) continue;
    if (!g.z_lockable(static_cast<int>(p), s.scheme.z)) {
      s.trace.push_back("final: " + g.proc_names[p] + " is not " + lock_list(g, s.scheme.z) + "-lockable");
      s.trace.push_back("result: no sufficient deadlock scheme");
      return result;
    }
  }
  if (auto bad = scheme_violation(g, s.scheme, true)) {
    throw std::logic_error("final scheme is not sufficient: " + *bad);
  }
  s.trace.push_back("result: sufficient deadlock scheme with Z = " + lock_list(g, s.scheme.z));
  result.scheme = s.scheme;
  return result;
}

// ---------------------------------------------------------------------------

LocallyLiveDecision decide_locally_live(const Lss& lss, std::size_t max_combinations,
                                        const SchemeOptions& opts) {
  if (!lss.is_two_lock()) throw Error(Errc::not_two_lock, "some process uses more than two locks");
  LocallyLiveDecision d;
  const std::size_t n = lss.processes.size();
  if (n == 0) {
    d.winning = true;
    d.strategy = Strategy{Annotation::two_lock, true, {}};
    return d;
  }
  std::vector<std::vector<MinimalBehavior>> options;
  for (const auto& p : lss.processes) {
    options.push_back(minimal_behaviors(p, true));
    if (options.back().empty()) return d;  // this process cannot be kept locally live
  }
  std::vector<std::string> proc_names;
  for (const auto& p : lss.processes) proc_names.push_back(p.id);

  std::vector<std::size_t> choice(n, 0);
  std::size_t explored = 0;
  while (true) {
    if (++explored > max_combinations) {
      throw Error(Errc::limit_exceeded, "more than " + std::to_string(max_combinations) + " behavior choices");
    }
    Behavior2 b;
    for (std::size_t i = 0; i < n; ++i) {
      b.locks.push_back(lss.processes[i].locks);
      b.patterns.push_back(options[i][choice[i]].patterns);
    }
    LockGraph g = build_lock_graph(b, lss.locks, proc_names);
    SchemeResult r = decide_sufficient_scheme(g, opts);
    if (!r.scheme) {
      d.winning = true;
      Strategy s{Annotation::two_lock, true, {}};
      for (std::size_t i = 0; i < n; ++i) s.local.push_back(options[i][choice[i]].strategy);
      d.strategy = std::move(s);
      d.scheme.reset();
      d.graph = std::move(g);
      d.behavior = std::move(b);
      return d;
    }
    if (explored == 1) {
      d.scheme = std::move(r.scheme);
      d.graph = std::move(g);
      d.behavior = std::move(b);
    }
    std::size_t k = 0;
    while (k < n && ++choice[k] == options[k].size()) choice[k++] = 0;
    if (k == n) break;
  }
  return d;
}

json to_json(const LockGraph& g, const DeadlockScheme& s) {
  json z = json::array();
  for (int t : s.z) z.push_back(g.lock_names[t]);
  json ds = json::object();
  for (int p : procs_within(g, s.z)) {
    auto it = s.ds.find(p);
    if (it == s.ds.end()) {
      ds[g.proc_names[p]] = nullptr;
      continue;
    }
    const LockEdge& e = it->second;
    ds[g.proc_names[p]] = {{"from", g.lock_names[e.from]}, {"to", g.lock_names[e.to]},
                           {"strength", e.strong ? "strong" : "weak"}};
  }
  return {{"Z", z}, {"ds", ds}};
}

}  // namespace lockctl

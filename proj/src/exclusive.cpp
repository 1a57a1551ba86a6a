#include "lockctl/exclusive.hpp"

#include <algorithm>
#include <numeric>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

namespace lockctl {

namespace {

bool is_edge_pattern(const Pattern2& pat) { return pat.owns.size() == 1 && pat.blocks.size() == 1; }

bool is_edge_pattern(const Pattern2& pat, int from, int to) {
  return pat.owns == LockSet::single(from) && pat.blocks == LockSet::single(to);
}

// Achievability with the subset of realizable patterns that satisfy `keep`.
template <class Keep>
std::optional<LocalStrategy> achieve_keeping(const PatternSpace2& space, Keep keep) {
  PatternSet allowed(space.size());
  for (std::size_t id = 0; id < space.size(); ++id) {
    if (keep(space.pattern(static_cast<int>(id)))) allowed.set(id);
  }
  return achieve(space.process(), space.graph(), space.classifier(), allowed, true);
}

std::vector<std::string> proc_ids(const Lss& lss) {
  std::vector<std::string> out;
  for (const auto& p : lss.processes) out.push_back(p.id);
  return out;
}

}  // namespace

ExclusiveCheck is_exclusive(const Lss& lss) {
  ExclusiveCheck check;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    for (std::size_t s = 0; s < p.states.size(); ++s) {
      const auto& out = p.out[s];
      auto get = std::find_if(out.begin(), out.end(), [&](int t) { return p.transitions[t].op.is_get(); });
      if (get == out.end()) continue;
      const Op& op = p.transitions[*get].op;
      bool same = std::all_of(out.begin(), out.end(), [&](int t) { return p.transitions[t].op == op; });
      if (!same) {
        check.exclusive = false;
        check.offending.emplace_back(static_cast<int>(i), static_cast<int>(s));
      }
    }
  }
  return check;
}

UnavoidableGraph unavoidable_graph(const Lss& lss) {
  UnavoidableGraph u;
  LockGraph& g = u.graph;
  g.locks = static_cast<int>(lss.locks.size());
  g.lock_names = lss.locks;
  g.proc_names = proc_ids(lss);
  for (const auto& p : lss.processes) {
    g.proc_locks.push_back(p.locks);
    g.solid.push_back(true);
    g.lockable.emplace_back();
    PatternSpace2 space(p);
    bool live = achieve_keeping(space, [](const Pattern2&) { return true; }).has_value();
    u.live.push_back(live);
    bool forced = false;
    if (live && p.locks.size() == 2) {
      const int proc = static_cast<int>(u.live.size()) - 1;
      int a = p.locks.first();
      int b = (p.locks - LockSet::single(a)).first();
      for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
        auto avoid = achieve_keeping(space, [&](const Pattern2& pat) { return !is_edge_pattern(pat, from, to); });
        if (!avoid) g.edges.push_back(LockEdge{from, proc, to, false});
      }
      forced = !achieve_keeping(space, [](const Pattern2& pat) { return !is_edge_pattern(pat); });
    }
    u.forced.push_back(forced);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return u;
}

const char* scc_class_name(SccClass c) {
  switch (c) {
    case SccClass::plain: return "plain";
    case SccClass::semi_deadlock: return "semi-deadlock";
    case SccClass::deadlock: return "deadlock";
    case SccClass::direct_semi_deadlock: return "direct-semi-deadlock";
    case SccClass::direct_deadlock: return "direct-deadlock";
  }
  return "?";
}

bool has_simple_cycle(const LockGraph& g, LockSet scc) {
  if (scc.size() < 2) return false;
  std::vector<const LockEdge*> inside;
  for (const auto& e : g.edges) {
    if (scc.contains(e.from) && scc.contains(e.to)) inside.push_back(&e);
  }
  for (const LockEdge* e : inside) {
    // A one-way edge closes a simple cycle with a shortest path back, which cannot use
    // its own label.
    if (!g.find(e->to, e->proc, e->from)) return true;
  }
  // All edges double: a simple cycle exists iff the process pairs contain an undirected cycle.
  std::vector<int> parent(g.locks);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<bool> seen(g.processes(), false);
  for (const LockEdge* e : inside) {
    if (seen[e->proc]) continue;
    seen[e->proc] = true;
    int a = root(e->from);
    int b = root(e->to);
    if (a == b) return true;
    parent[a] = b;
  }
  return false;
}

SccAnalysis classify_sccs(const LockGraph& g, const std::vector<bool>& forced) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  Graph bg(g.locks);
  for (const auto& e : g.edges) boost::add_edge(e.from, e.to, bg);
  std::vector<int> raw(g.locks);
  int count = g.locks ? boost::strong_components(bg, raw.data()) : 0;

  // Renumber components by their smallest lock.
  std::vector<int> rename(count, -1);
  int next = 0;
  SccAnalysis a;
  a.component.assign(g.locks, -1);
  for (int t = 0; t < g.locks; ++t) {
    if (rename[raw[t]] < 0) {
      rename[raw[t]] = next++;
      a.sccs.emplace_back();
    }
    a.component[t] = rename[raw[t]];
    a.sccs[a.component[t]].locks.insert(t);
  }

  std::vector<LockSet> succ(a.sccs.size());  // condensation, as sets of component ids
  std::vector<bool> has_edges(g.processes(), false);
  for (const auto& e : g.edges) {
    has_edges[e.proc] = true;
    int c = a.component[e.from];
    int d = a.component[e.to];
    if (c != d) {
      succ[c].insert(d);
    } else if (!g.find(e.to, e.proc, e.from)) {
      a.sccs[c].all_double = false;
    }
  }

  for (std::size_t c = 0; c < a.sccs.size(); ++c) {
    SccInfo& info = a.sccs[c];
    if (has_simple_cycle(g, info.locks)) {
      info.kind = SccClass::direct_deadlock;
      continue;
    }
    if (!info.all_double) continue;
    for (std::size_t p = 0; p < g.processes(); ++p) {
      // The forced edge must be new: a process already present in the SCC adds no label.
      if (forced[p] && !has_edges[p] && g.proc_locks[p].size() == 2 && g.proc_locks[p].subset_of(info.locks)) {
        info.kind = SccClass::direct_semi_deadlock;
      }
    }
  }

  // Component ids need not be topologically sorted; iterate reachability to a fixpoint.
  std::vector<bool> reaches_dead(a.sccs.size()), reaches_semi(a.sccs.size());
  for (std::size_t c = 0; c < a.sccs.size(); ++c) {
    reaches_dead[c] = a.sccs[c].kind == SccClass::direct_deadlock;
    reaches_semi[c] = reaches_dead[c] || a.sccs[c].kind == SccClass::direct_semi_deadlock;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t c = 0; c < a.sccs.size(); ++c) {
      for (int d : succ[c]) {
        if (reaches_dead[d] && !reaches_dead[c]) reaches_dead[c] = changed = true;
        if (reaches_semi[d] && !reaches_semi[c]) reaches_semi[c] = changed = true;
      }
    }
  }
  for (std::size_t c = 0; c < a.sccs.size(); ++c) {
    SccInfo& info = a.sccs[c];
    if (info.kind == SccClass::plain) {
      if (reaches_dead[c]) info.kind = SccClass::deadlock;
      else if (reaches_semi[c]) info.kind = SccClass::semi_deadlock;
    }
    if (reaches_semi[c]) a.bt |= info.locks;
  }
  for (int t = 0; t < g.locks; ++t) {
    if (!a.bt.contains(t)) a.ft.insert(t);
  }
  return a;
}

namespace {

// Position of every FT component in a linear order where a component comes before every
// component it reaches; ties go to the smaller lock.
std::vector<int> ft_rank(const LockGraph& g, const SccAnalysis& a) {
  const std::size_t n = a.sccs.size();
  std::vector<int> indegree(n, 0);
  std::vector<LockSet> succ(n);
  for (const auto& e : g.edges) {
    int c = a.component[e.from];
    int d = a.component[e.to];
    if (c == d || !a.ft.contains(e.from) || !a.ft.contains(e.to) || succ[c].contains(d)) continue;
    succ[c].insert(d);
    ++indegree[d];
  }
  std::vector<int> rank(n, -1);
  std::vector<bool> done(n, false);
  int position = 0;
  for (std::size_t k = 0; k < n; ++k) {
    int pick = -1;
    for (std::size_t c = 0; c < n && pick < 0; ++c) {
      if (!done[c] && indegree[c] == 0) pick = static_cast<int>(c);
    }
    if (pick < 0) break;
    done[pick] = true;
    if (a.sccs[pick].locks.subset_of(a.ft)) rank[pick] = position++;
    for (int d : succ[pick]) --indegree[d];
  }
  return rank;
}

// Edge patterns of a process with locks {a, b} that point the wrong way.
bool against_order(const Pattern2& pat, const SccAnalysis& a, const std::vector<int>& rank) {
  if (!is_edge_pattern(pat)) return false;
  int from = pat.owns.first();
  int to = pat.blocks.first();
  bool from_bt = a.bt.contains(from);
  bool to_bt = a.bt.contains(to);
  if (from_bt && to_bt) return false;
  if (from_bt != to_bt) return to_bt;  // keep BT -> FT
  int cf = a.component[from];
  int ct = a.component[to];
  return cf != ct && rank[cf] > rank[ct];
}

std::optional<Strategy> assemble(const Lss& lss, const UnavoidableGraph& u, const SccAnalysis& a, int chosen) {
  std::vector<int> rank = ft_rank(u.graph, a);
  Strategy s{Annotation::two_lock, true, {}};
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const int q = static_cast<int>(i);
    PatternSpace2 space(lss.processes[i]);
    std::optional<LocalStrategy> ls;
    if (q == chosen) {
      auto avoids_bt = [&](const Pattern2& pat) { return !pat.blocks.intersects(a.bt); };
      ls = achieve_keeping(space, [&](const Pattern2& pat) { return avoids_bt(pat) && !against_order(pat, a, rank); });
      if (!ls) ls = achieve_keeping(space, avoids_bt);
    } else {
      ls = achieve_keeping(space, [&](const Pattern2& pat) {
        if (!is_edge_pattern(pat)) return true;
        return u.graph.find(pat.owns.first(), q, pat.blocks.first()) != nullptr;
      });
      if (!ls) ls = achieve_keeping(space, [&](const Pattern2& pat) { return !against_order(pat, a, rank); });
    }
    if (!ls) return std::nullopt;
    s.local.push_back(std::move(*ls));
  }
  return s;
}

bool has_no_scheme(const Lss& lss, const Strategy& s) {
  std::vector<std::string> names = proc_ids(lss);
  LockGraph g = build_lock_graph(extract_behavior(lss, s), lss.locks, names);
  return !decide_sufficient_scheme(g).scheme.has_value();
}

}  // namespace

ExclusiveDecision decide_exclusive(const Lss& lss) {
  if (!lss.is_two_lock()) throw Error(Errc::not_two_lock, "some process uses more than two locks");
  ExclusiveCheck check = is_exclusive(lss);
  if (!check.exclusive) {
    auto [proc, state] = check.offending.front();
    const Process& p = lss.processes[proc];
    throw Error(Errc::not_exclusive,
                "state '" + p.states[state] + "' of process '" + p.id + "' mixes a get with other operations");
  }
  ExclusiveDecision d;
  if (lss.processes.empty()) {
    d.winning = true;
    d.strategy = Strategy{Annotation::two_lock, true, {}};
    return d;
  }
  d.unavoidable = unavoidable_graph(lss);
  d.analysis = classify_sccs(d.unavoidable.graph, d.unavoidable.forced);
  if (std::find(d.unavoidable.live.begin(), d.unavoidable.live.end(), false) != d.unavoidable.live.end()) {
    return d;  // some process cannot be kept locally live at all
  }

  // In an exclusive process a get is only reachable through a state whose every
  // transition requests that lock, so avoiding requests of BT locks avoids acquiring them.
  std::vector<int> free;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    PatternSpace2 space(lss.processes[i]);
    if (achieve_keeping(space, [&](const Pattern2& pat) { return !pat.blocks.intersects(d.analysis.bt); })) {
      free.push_back(static_cast<int>(i));
    }
  }
  if (free.empty()) return d;
  d.winning = true;
  d.free_process = free.front();
  for (int p : free) {
    auto s = assemble(lss, d.unavoidable, d.analysis, p);
    if (s && has_no_scheme(lss, *s)) {
      d.free_process = p;
      d.strategy = std::move(s);
      return d;
    }
  }
  // The direct construction did not verify; take a strategy from the general search.
  d.constructive = false;
  LocallyLiveDecision fallback = decide_locally_live(lss);
  if (!fallback.winning) throw std::logic_error("exclusive analysis and general search disagree");
  d.strategy = std::move(fallback.strategy);
  return d;
}

json to_json(const LockGraph& g, const SccAnalysis& a) {
  auto names = [&](LockSet s) {
    json out = json::array();
    for (int t : s) out.push_back(g.lock_names[t]);
    return out;
  };
  json sccs = json::array();
  for (const auto& info : a.sccs) {
    sccs.push_back({{"locks", names(info.locks)}, {"class", scc_class_name(info.kind)}, {"all_double", info.all_double}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"from", g.lock_names[e.from]}, {"proc", g.proc_names[e.proc]}, {"to", g.lock_names[e.to]}});
  }
  return {{"edges", edges}, {"sccs", sccs}, {"bt", names(a.bt)}, {"ft", names(a.ft)}};
}

}  // namespace lockctl

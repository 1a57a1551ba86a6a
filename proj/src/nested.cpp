#include "lockctl/nested.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace lockctl {

namespace {

void sort_unique(std::vector<StairPattern>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

StairPattern make_pattern(const LocalState& s, LockSet blocks) {
  return StairPattern{s.owned, blocks, stair_order(s)};
}

int lock_count(const StairBehavior& b) {
  int count = 0;
  auto bump = [&](int t) { count = std::max(count, t + 1); };
  for (const auto& ps : b.patterns) {
    for (const auto& pat : ps) {
      for (int t : pat.owns | pat.blocks) bump(t);
      for (auto [x, y] : pat.order) {
        bump(x);
        bump(y);
      }
    }
  }
  return count;
}

json lock_names(const Lss& lss, LockSet s) {
  json out = json::array();
  for (int t : s) out.push_back(lss.locks.at(t));
  return out;
}

json pattern_json(const Lss& lss, const StairPattern& pat) {
  json pairs = json::array();
  for (auto [x, y] : pat.order) pairs.push_back({lss.locks.at(x), lss.locks.at(y)});
  return {{"owns", lock_names(lss, pat.owns)}, {"blocks", lock_names(lss, pat.blocks)}, {"order_pairs", pairs}};
}

}  // namespace

NestedCheck check_nested(const Lss& lss) {
  NestedCheck check;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    std::map<LocalState, std::pair<int, int>> parent;  // state -> (transition, index of predecessor)
    std::vector<LocalState> order;
    LocalState init = initial_local_state(p, Annotation::nested);
    parent.emplace(init, std::pair{-1, -1});
    order.push_back(init);
    for (std::size_t n = 0; n < order.size(); ++n) {
      for (int ti : p.out[order[n].base]) {
        LocalState next = order[n];
        Move m = advance(next, p.transitions[ti], Annotation::nested);
        if (m == Move::discipline) continue;
        if (m == Move::not_nested) {
          check.nested = false;
          check.proc = static_cast<int>(i);
          check.run.push_back(ti);
          for (int k = static_cast<int>(n); k >= 0;) {
            auto [t, prev] = parent.at(order[k]);
            if (t >= 0) check.run.push_back(t);
            k = prev;
          }
          std::reverse(check.run.begin(), check.run.end());
          return check;
        }
        if (parent.emplace(next, std::pair{ti, static_cast<int>(n)}).second) order.push_back(next);
      }
    }
  }
  return check;
}

StairDecomposition stair_decompose(std::span<const Op> run) {
  std::vector<int> stack;
  for (const Op& op : run) {
    if (op.is_get()) {
      if (std::find(stack.begin(), stack.end(), op.lock) != stack.end()) {
        throw Error(Errc::invalid_argument, "run acquires a lock it already holds");
      }
      stack.push_back(op.lock);
    } else if (op.is_rel()) {
      if (stack.empty() || stack.back() != op.lock) {
        throw Error(Errc::not_nested, "run releases a lock that is not the last one acquired");
      }
      stack.pop_back();
    }
  }
  std::vector<std::size_t> cuts;
  for (int t : stack) {
    for (std::size_t k = run.size(); k-- > 0;) {
      if (run[k].is_get() && run[k].lock == t) {
        cuts.push_back(k);
        break;
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  StairDecomposition d;
  std::size_t begin = 0;
  for (std::size_t cut : cuts) {
    d.segments.emplace_back(run.begin() + static_cast<long>(begin), run.begin() + static_cast<long>(cut));
    d.stairs.push_back(run[cut].lock);
    begin = cut + 1;
  }
  d.segments.emplace_back(run.begin() + static_cast<long>(begin), run.end());
  return d;
}

std::vector<std::pair<int, int>> stair_order(const LocalState& s) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < s.stack.size(); ++i) {
    for (int t : s.touched[i]) out.emplace_back(s.stack[i], t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StairPattern> extract_stair_behavior(const Process& p, const AnnotatedProcess& ap,
                                                 const LocalStrategy& strategy) {
  std::vector<StairPattern> out;
  std::vector<bool> seen(ap.nodes.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    bool risky = true;
    LockSet blocks;
    for (const auto& e : ap.out[n]) {
      const Transition& t = p.transitions[e.transition];
      if (!strategy.allows(p, ap.nodes[n], t.action)) continue;
      if (t.op.is_get()) blocks.insert(t.op.lock);
      else risky = false;
      if (!seen[e.dst]) {
        seen[e.dst] = true;
        stack.push_back(e.dst);
      }
    }
    if (risky) out.push_back(make_pattern(ap.nodes[n], blocks));
  }
  sort_unique(out);
  return out;
}

StairBehavior extract_stair_behavior(const Lss& lss, const Strategy& strategy) {
  StairBehavior b;
  static const LocalStrategy allow_all;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    AnnotatedProcess ap = annotate(p, Annotation::nested);
    b.patterns.push_back(extract_stair_behavior(p, ap, i < strategy.local.size() ? strategy.local[i] : allow_all));
  }
  return b;
}

StairSpace::StairSpace(const Process& p, int max_locks) : proc_(&p) {
  if (p.locks.size() > max_locks) {
    throw Error(Errc::limit_exceeded, "process '" + p.id + "' uses " + std::to_string(p.locks.size()) +
                                          " locks, more than the nested bound " + std::to_string(max_locks));
  }
  ap_ = annotate(p, Annotation::nested);
  for_each_risky_option(p, ap_, false, [&](int node, LockSet blocks) {
    table_.intern(make_pattern(ap_.nodes[node], blocks));
  });
}

Classifier StairSpace::classifier() const {
  return [this](const LocalState& s, LockSet blocks) { return table_.find(make_pattern(s, blocks)); };
}

PatternSet StairSpace::to_set(std::span<const StairPattern> patterns) const {
  PatternSet set(table_.size());
  for (const auto& pat : patterns) {
    int id = table_.find(pat);
    if (id >= 0) set.set(id);
  }
  return set;
}

std::vector<StairPattern> StairSpace::to_patterns(const PatternSet& set) const {
  std::vector<StairPattern> out;
  for (std::size_t id = set.find_first(); id != PatternSet::npos; id = set.find_next(id)) {
    out.push_back(table_.at(static_cast<int>(id)));
  }
  sort_unique(out);
  return out;
}

std::optional<LocalStrategy> achievable_nested(const Process& p, std::span<const StairPattern> candidate,
                                               bool locally_live) {
  StairSpace space(p);
  return achieve(p, space.graph(), space.classifier(), space.to_set(candidate), locally_live);
}

std::vector<MinimalStairBehavior> minimal_stair_behaviors(const Process& p, bool locally_live) {
  StairSpace space(p);
  std::vector<MinimalStairBehavior> out;
  for (auto& a : minimal_achievable(p, space.graph(), space.classifier(), space.size(), locally_live)) {
    out.push_back(MinimalStairBehavior{space.to_patterns(a.patterns), std::move(a.strategy)});
  }
  return out;
}

std::optional<StairSelection> stair_deadlock_condition(const StairBehavior& b) {
  const std::size_t n = b.patterns.size();
  const int locks = lock_count(b);
  std::vector<LockSet> ownable(n + 1);
  for (std::size_t i = n; i-- > 0;) {
    ownable[i] = ownable[i + 1];
    for (const auto& pat : b.patterns[i]) ownable[i] |= pat.owns;
  }

  std::vector<std::vector<int>> need(locks, std::vector<int>(locks, 0));
  auto reaches = [&](int from, int to) {
    LockSet seen = LockSet::single(from);
    std::vector<int> stack{from};
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      if (t == to) return true;
      for (int u = 0; u < locks; ++u) {
        if (need[t][u] > 0 && !seen.contains(u)) {
          seen.insert(u);
          stack.push_back(u);
        }
      }
    }
    return false;
  };

  std::vector<StairPattern> chosen(n);
  std::function<bool(std::size_t, LockSet, LockSet)> search = [&](std::size_t i, LockSet owns,
                                                                  LockSet blocks) -> bool {
    if (!blocks.subset_of(owns | ownable[i])) return false;
    if (i == n) return true;
    for (const auto& pat : b.patterns[i]) {
      if (pat.owns.intersects(owns)) continue;
      std::size_t added = 0;
      bool cyclic = false;
      for (; added < pat.order.size(); ++added) {
        auto [x, y] = pat.order[added];
        if (need[x][y] == 0 && reaches(y, x)) {
          cyclic = true;
          break;
        }
        ++need[x][y];
      }
      if (!cyclic) {
        chosen[i] = pat;
        if (search(i + 1, owns | pat.owns, blocks | pat.blocks)) return true;
      }
      for (std::size_t k = 0; k < added; ++k) --need[pat.order[k].first][pat.order[k].second];
    }
    return false;
  };
  if (!search(0, {}, {})) return std::nullopt;

  StairSelection sel;
  sel.chosen = chosen;
  std::vector<int> indegree(locks, 0);
  for (int t = 0; t < locks; ++t) {
    for (int u = 0; u < locks; ++u) indegree[u] += need[t][u] > 0 ? 1 : 0;
  }
  std::vector<bool> placed(locks, false);
  for (int k = 0; k < locks; ++k) {
    int next = -1;
    for (int t = 0; t < locks && next < 0; ++t) {
      if (!placed[t] && indegree[t] == 0) next = t;
    }
    placed[next] = true;
    sel.order.push_back(next);
    for (int u = 0; u < locks; ++u) indegree[u] -= need[next][u] > 0 ? 1 : 0;
  }
  return sel;
}

NestedDecision decide_nested(const Lss& lss, bool locally_live, std::size_t max_combinations) {
  NestedDecision d;
  const std::size_t n = lss.processes.size();
  if (n == 0) {
    d.winning = true;
    d.strategy = Strategy{Annotation::nested, locally_live, {}};
    return d;
  }
  std::vector<std::vector<MinimalStairBehavior>> options;
  for (const auto& p : lss.processes) {
    options.push_back(minimal_stair_behaviors(p, locally_live));
    if (options.back().empty()) return d;
  }
  std::vector<std::size_t> choice(n, 0);
  std::size_t explored = 0;
  while (true) {
    if (++explored > max_combinations) {
      throw Error(Errc::limit_exceeded, "more than " + std::to_string(max_combinations) + " behavior choices");
    }
    StairBehavior b;
    for (std::size_t i = 0; i < n; ++i) b.patterns.push_back(options[i][choice[i]].patterns);
    auto sel = stair_deadlock_condition(b);
    if (!sel) {
      d.winning = true;
      Strategy s{Annotation::nested, locally_live, {}};
      for (std::size_t i = 0; i < n; ++i) s.local.push_back(options[i][choice[i]].strategy);
      d.strategy = std::move(s);
      d.selection.reset();
      d.behavior = std::move(b);
      return d;
    }
    if (explored == 1) {
      d.selection = std::move(sel);
      d.behavior = std::move(b);
    }
    std::size_t k = 0;
    while (k < n && ++choice[k] == options[k].size()) choice[k++] = 0;
    if (k == n) break;
  }
  return d;
}

json to_json(const Lss& lss, const StairBehavior& b) {
  json out = json::object();
  for (std::size_t i = 0; i < b.patterns.size(); ++i) {
    json list = json::array();
    for (const auto& pat : b.patterns[i]) list.push_back(pattern_json(lss, pat));
    out[lss.processes.at(i).id] = list;
  }
  return out;
}

json to_json(const Lss& lss, const StairSelection& s) {
  json chosen = json::object();
  for (std::size_t i = 0; i < s.chosen.size(); ++i) chosen[lss.processes.at(i).id] = pattern_json(lss, s.chosen[i]);
  json order = json::array();
  for (int t : s.order) order.push_back(lss.locks.at(t));
  return {{"chosen", chosen}, {"order", order}};
}

}  // namespace lockctl

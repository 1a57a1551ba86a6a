#include "lockctl/patterns2.hpp"

#include <algorithm>
#include <functional>

namespace lockctl {

namespace {

Pattern2 make_pattern(const LocalState& s, LockSet blocks) {
  return Pattern2{s.owned, blocks, s.release_bit && s.owned.size() == 1};
}

void sort_unique(std::vector<Pattern2>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

int lock_count(const Behavior2& b) {
  int count = 0;
  auto bump = [&](LockSet s) {
    for (int t : s) count = std::max(count, t + 1);
  };
  for (LockSet s : b.locks) bump(s);
  for (const auto& ps : b.patterns) {
    for (const auto& p : ps) {
      bump(p.owns);
      bump(p.blocks);
    }
  }
  return count;
}

}  // namespace

std::vector<Pattern2> pattern_universe(LockSet locks) {
  std::vector<Pattern2> out;
  std::vector<int> members(locks.begin(), locks.end());
  const std::uint64_t full = std::uint64_t{1} << members.size();
  for (std::uint64_t o = 0; o < full; ++o) {
    LockSet owns;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if ((o >> k) & 1U) owns.insert(members[k]);
    }
    LockSet rest = locks - owns;
    std::vector<int> free(rest.begin(), rest.end());
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << free.size()); ++b) {
      LockSet blocks;
      for (std::size_t k = 0; k < free.size(); ++k) {
        if ((b >> k) & 1U) blocks.insert(free[k]);
      }
      out.push_back(Pattern2{owns, blocks, false});
      if (owns.size() == 1 && locks.size() >= 2) out.push_back(Pattern2{owns, blocks, true});
    }
  }
  sort_unique(out);
  return out;
}

std::vector<Pattern2> extract_behavior(const Process& p, const AnnotatedProcess& ap,
                                       const LocalStrategy& strategy) {
  std::vector<Pattern2> out;
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

Behavior2 extract_behavior(const Lss& lss, const Strategy& strategy) {
  Behavior2 b;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    AnnotatedProcess ap = annotate(p, Annotation::two_lock);
    static const LocalStrategy allow_all;
    const LocalStrategy& ls = i < strategy.local.size() ? strategy.local[i] : allow_all;
    b.locks.push_back(p.locks);
    b.patterns.push_back(extract_behavior(p, ap, ls));
  }
  return b;
}

PatternSpace2::PatternSpace2(const Process& p) : proc_(&p) {
  if (p.locks.size() > 2) {
    throw Error(Errc::not_two_lock, "process '" + p.id + "' uses " + std::to_string(p.locks.size()) + " locks");
  }
  ap_ = annotate(p, Annotation::two_lock);
  for_each_risky_option(p, ap_, false, [&](int node, LockSet blocks) {
    table_.intern(make_pattern(ap_.nodes[node], blocks));
  });
}

Classifier PatternSpace2::classifier() const {
  return [this](const LocalState& s, LockSet blocks) { return table_.find(make_pattern(s, blocks)); };
}

PatternSet PatternSpace2::to_set(std::span<const Pattern2> patterns) const {
  PatternSet set(table_.size());
  for (const auto& pat : patterns) {
    int id = table_.find(pat);
    if (id >= 0) set.set(id);
  }
  return set;
}

std::vector<Pattern2> PatternSpace2::to_patterns(const PatternSet& set) const {
  std::vector<Pattern2> out;
  for (std::size_t id = set.find_first(); id != PatternSet::npos; id = set.find_next(id)) {
    out.push_back(table_.at(static_cast<int>(id)));
  }
  sort_unique(out);
  return out;
}

std::optional<LocalStrategy> achievable(const Process& p, std::span<const Pattern2> candidate,
                                        bool locally_live) {
  PatternSpace2 space(p);
  return achieve(p, space.graph(), space.classifier(), space.to_set(candidate), locally_live);
}

std::vector<MinimalBehavior> minimal_behaviors(const Process& p, bool locally_live) {
  PatternSpace2 space(p);
  std::vector<MinimalBehavior> out;
  for (auto& a : minimal_achievable(p, space.graph(), space.classifier(), space.size(), locally_live)) {
    out.push_back(MinimalBehavior{space.to_patterns(a.patterns), std::move(a.strategy)});
  }
  return out;
}

std::optional<DeadlockSelection> deadlock_condition(const Behavior2& b) {
  const std::size_t n = b.patterns.size();
  const int locks = lock_count(b);
  // Locks that processes i.. could still own.
  std::vector<LockSet> ownable(n + 1);
  for (std::size_t i = n; i-- > 0;) {
    ownable[i] = ownable[i + 1];
    for (const auto& pat : b.patterns[i]) ownable[i] |= pat.owns;
  }

  // need[t][u] counts selected strong patterns forcing t < u.
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

  std::vector<Pattern2> chosen(n);
  std::function<bool(std::size_t, LockSet, LockSet)> search = [&](std::size_t i, LockSet owns,
                                                                  LockSet blocks) -> bool {
    if (!blocks.subset_of(owns | ownable[i])) return false;
    if (i == n) return true;
    for (const auto& pat : b.patterns[i]) {
      if (pat.owns.intersects(owns)) continue;
      std::optional<std::pair<int, int>> constraint;
      if (pat.strong) {
        LockSet other = b.locks[i] - pat.owns;
        if (other.empty()) continue;  // a strong pattern needs a second lock
        int t = pat.owns.first();
        int u = other.first();
        if (need[t][u] == 0 && reaches(u, t)) continue;
        constraint = {t, u};
        ++need[t][u];
      }
      chosen[i] = pat;
      if (search(i + 1, owns | pat.owns, blocks | pat.blocks)) return true;
      if (constraint) --need[constraint->first][constraint->second];
    }
    return false;
  };
  if (!search(0, {}, {})) return std::nullopt;

  DeadlockSelection sel;
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

Decision2 decide_general_2lss(const Lss& lss, std::size_t max_combinations) {
  if (!lss.is_two_lock()) throw Error(Errc::not_two_lock, "some process uses more than two locks");
  Decision2 d;
  const std::size_t n = lss.processes.size();
  if (n == 0) {
    d.winning = true;
    d.strategy = Strategy{Annotation::two_lock, false, {}};
    return d;
  }
  std::vector<std::vector<MinimalBehavior>> options;
  for (const auto& p : lss.processes) options.push_back(minimal_behaviors(p, false));

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
    auto sel = deadlock_condition(b);
    if (!sel) {
      d.winning = true;
      Strategy s{Annotation::two_lock, false, {}};
      for (std::size_t i = 0; i < n; ++i) s.local.push_back(options[i][choice[i]].strategy);
      d.strategy = std::move(s);
      d.behavior = std::move(b);
      d.selection.reset();
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

namespace {

json pattern_json(const Lss& lss, const Pattern2& pat) {
  auto names = [&](LockSet set) {
    json out = json::array();
    for (int t : set) out.push_back(lss.locks.at(t));
    return out;
  };
  return {{"owns", names(pat.owns)}, {"blocks", names(pat.blocks)}, {"strength", pat.strong ? "strong" : "weak"}};
}

}  // namespace

json to_json(const Lss& lss, const Behavior2& b) {
  json out = json::object();
  for (std::size_t i = 0; i < b.patterns.size(); ++i) {
    json list = json::array();
    for (const auto& pat : b.patterns[i]) list.push_back(pattern_json(lss, pat));
    out[lss.processes.at(i).id] = list;
  }
  return out;
}

json to_json(const Lss& lss, const DeadlockSelection& s) {
  json chosen = json::object();
  for (std::size_t i = 0; i < s.chosen.size(); ++i) chosen[lss.processes.at(i).id] = pattern_json(lss, s.chosen[i]);
  json order = json::array();
  for (int t : s.order) order.push_back(lss.locks.at(t));
  return {{"chosen", chosen}, {"order", order}};
}

}  // namespace lockctl

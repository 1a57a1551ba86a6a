#include "lockctl/achieve.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace lockctl {

namespace {

bool is_ctrl(const Process& p, const AnnotatedEdge& e) {
  return p.controllable[p.transitions[e.transition].action];
}

const Op& op_of(const Process& p, const AnnotatedEdge& e) { return p.transitions[e.transition].op; }

std::vector<LockSet> subsets_largest_first(LockSet locks) {
  std::vector<int> members(locks.begin(), locks.end());
  std::vector<LockSet> out;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << members.size()); ++s) {
    LockSet x;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if ((s >> k) & 1U) x.insert(members[k]);
    }
    out.push_back(x);
  }
  std::stable_sort(out.begin(), out.end(), [](LockSet a, LockSet b) { return a.size() > b.size(); });
  return out;
}

}  // namespace

void for_each_risky_option(const Process& p, const AnnotatedProcess& ap, bool locally_live,
                           const std::function<void(int, LockSet)>& visit) {
  for (std::size_t n = 0; n < ap.nodes.size(); ++n) {
    LockSet env_locks;
    LockSet ctrl_locks;
    bool env_nonget = false;
    bool has_env = false;
    for (const auto& e : ap.out[n]) {
      const Op& op = op_of(p, e);
      if (is_ctrl(p, e)) {
        if (op.is_get()) ctrl_locks.insert(op.lock);
      } else {
        has_env = true;
        if (op.is_get()) env_locks.insert(op.lock);
        else env_nonget = true;
      }
    }
    if (env_nonget) continue;
    for (LockSet x : subsets_largest_first(ctrl_locks)) {
      if (locally_live && !has_env && x.empty()) continue;
      visit(static_cast<int>(n), env_locks | x);
    }
  }
}

PatternSet behaviour_of(const Process& p, const AnnotatedProcess& ap, const LocalStrategy& strategy,
                        const Classifier& classify, std::size_t universe) {
  PatternSet result(universe);
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
    if (!risky) continue;
    int id = classify(ap.nodes[n], blocks);
    if (id < 0 || static_cast<std::size_t>(id) >= universe) {
      throw std::logic_error("process '" + p.id + "' produces a pattern outside the universe");
    }
    result.set(id);
  }
  return result;
}

std::optional<LocalStrategy> achieve(const Process& p, const AnnotatedProcess& ap,
                                     const Classifier& classify, const PatternSet& allowed,
                                     bool locally_live) {
  const std::size_t n_nodes = ap.nodes.size();
  std::vector<bool> alive(n_nodes, true);
  std::vector<ActionSet> choice(n_nodes, 0);

  auto evaluate = [&](std::size_t n) -> bool {
    const auto& out = ap.out[n];
    LockSet env_locks;
    bool has_env = false;
    bool any_nonget = false;
    ActionSet all_ctrl = 0;
    LockSet ctrl_locks;
    for (const auto& e : out) {
      const Op& op = op_of(p, e);
      if (!is_ctrl(p, e)) {
        if (!alive[e.dst]) return false;
        has_env = true;
        if (op.is_get()) env_locks.insert(op.lock);
        else any_nonget = true;
        continue;
      }
      if (!alive[e.dst]) continue;
      all_ctrl |= ActionSet{1} << p.transitions[e.transition].action;
      if (op.is_get()) ctrl_locks.insert(op.lock);
      else any_nonget = true;
    }
    if (any_nonget) {
      choice[n] = all_ctrl;
      return true;
    }
    for (LockSet x : subsets_largest_first(ctrl_locks)) {
      if (locally_live && !has_env && x.empty()) continue;
      int id = classify(ap.nodes[n], env_locks | x);
      if (id < 0 || static_cast<std::size_t>(id) >= allowed.size() || !allowed.test(id)) continue;
      ActionSet s = 0;
      for (const auto& e : out) {
        const Op& op = op_of(p, e);
        if (is_ctrl(p, e) && alive[e.dst] && x.contains(op.lock)) {
          s |= ActionSet{1} << p.transitions[e.transition].action;
        }
      }
      choice[n] = s;
      return true;
    }
    return false;
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t n = 0; n < n_nodes; ++n) {
      if (alive[n] && !evaluate(n)) {
        alive[n] = false;
        changed = true;
      }
    }
  }
  if (!alive[0]) return std::nullopt;

  LocalStrategy strategy;
  for (std::size_t n = 0; n < n_nodes; ++n) {
    if (alive[n]) strategy.exact[ap.nodes[n]] = choice[n];
  }
  PatternSet got = behaviour_of(p, ap, strategy, classify, allowed.size());
  if (!got.is_subset_of(allowed)) {
    throw std::logic_error("achieved strategy of '" + p.id + "' leaves the candidate set");
  }
  return strategy;
}

std::optional<LocalStrategy> locally_live_strategy(const Process& p) {
  AnnotatedProcess ap = annotate(p, Annotation::owned);
  PatternSet all(1);
  all.set();
  return achieve(p, ap, [](const LocalState&, LockSet) { return 0; }, all, true);
}

std::vector<AchievableSet> minimal_achievable(const Process& p, const AnnotatedProcess& ap,
                                              const Classifier& classify, std::size_t universe,
                                              bool locally_live, std::size_t max_nodes) {
  std::vector<AchievableSet> found;
  std::set<PatternSet> visited;
  std::set<PatternSet> behaviours;
  std::vector<PatternSet> work{PatternSet(universe)};
  while (!work.empty()) {
    PatternSet forbidden = std::move(work.back());
    work.pop_back();
    if (!visited.insert(forbidden).second) continue;
    if (visited.size() > max_nodes) {
      throw Error(Errc::limit_exceeded, "achievable-set search for '" + p.id + "' is too large");
    }
    PatternSet allowed = ~forbidden;
    auto strategy = achieve(p, ap, classify, allowed, locally_live);
    if (!strategy) continue;
    PatternSet b = behaviour_of(p, ap, *strategy, classify, universe);
    if (behaviours.insert(b).second) found.push_back(AchievableSet{b, std::move(*strategy)});
    for (std::size_t id = b.find_first(); id != PatternSet::npos; id = b.find_next(id)) {
      PatternSet next = forbidden;
      next.set(id);
      if (!visited.count(next)) work.push_back(std::move(next));
    }
  }
  std::vector<AchievableSet> minimal;
  for (std::size_t i = 0; i < found.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < found.size() && !dominated; ++j) {
      dominated = j != i && found[j].patterns.is_proper_subset_of(found[i].patterns);
    }
    if (!dominated) minimal.push_back(found[i]);
  }
  std::stable_sort(minimal.begin(), minimal.end(), [](const AchievableSet& a, const AchievableSet& b) {
    return a.patterns.count() < b.patterns.count();
  });
  return minimal;
}

}  // namespace lockctl

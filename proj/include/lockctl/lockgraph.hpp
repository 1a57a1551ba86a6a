#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lockctl/patterns2.hpp"

namespace lockctl {

struct LockEdge {
  int from = 0;
  int proc = 0;
  int to = 0;
  bool strong = false;
  auto operator<=>(const LockEdge&) const = default;
};

struct LockGraph {
  int locks = 0;
  std::vector<LockSet> proc_locks;              // T_p
  std::vector<LockEdge> edges;                  // sorted by (from, proc, to)
  std::vector<bool> solid;                      // per process
  std::vector<std::vector<LockSet>> lockable;   // per process, every B with a pattern ∅ → B
  std::vector<std::string> lock_names;
  std::vector<std::string> proc_names;

  std::size_t processes() const { return proc_locks.size(); }
  const LockEdge* find(int from, int proc, int to) const;
  bool z_lockable(int proc, LockSet z) const;
  std::string edge_text(const LockEdge& e) const;
};

// Throws NotLocallyLiveBehavior on a pattern with empty blocks. Names default to t1.. / p1..
LockGraph build_lock_graph(const Behavior2& b, std::vector<std::string> lock_names = {},
                           std::vector<std::string> proc_names = {});

// ds assigns at most one edge to each process whose two locks lie in z.
struct DeadlockScheme {
  LockSet z;
  std::map<int, LockEdge> ds;
};

// Processes whose two locks both lie in z.
std::vector<int> procs_within(const LockGraph& g, LockSet z);

// Empty when `s` is a z-deadlock scheme of g (and sufficient, if requested); otherwise the
// first violated condition.
std::optional<std::string> scheme_violation(const LockGraph& g, const DeadlockScheme& s,
                                            bool sufficient);

// The shrinking graph H with the growing lock set Z, plus a Z-deadlock scheme kept alongside.
struct SchemeState {
  std::vector<LockEdge> h;  // sorted like LockGraph::edges
  DeadlockScheme scheme;
  std::vector<std::string> trace;

  bool has(int from, int proc, int to) const;
  void erase(const LockEdge& e);
};

struct SchemeOptions {
  // Called after every stage with its name; used by tests to re-check invariants.
  std::function<void(const LockGraph&, const SchemeState&, const std::string&)> observer;
  std::size_t max_cycles = 100'000;
};

struct SchemeResult {
  std::optional<DeadlockScheme> scheme;  // sufficient deadlock scheme, if any
  SchemeState state;
  bool failed_early = false;  // a sub-algorithm proved there is none
};

enum class StageResult { unchanged, changed, failed };

// Individual stages; `failed` means the stage proved there is no sufficient scheme.
StageResult trim(const LockGraph& g, SchemeState& s, std::vector<int> dirty = {});
StageResult absorb_solid_cycles(const LockGraph& g, SchemeState& s, const SchemeOptions& opts = {});
StageResult extend_reach(const LockGraph& g, SchemeState& s);
StageResult incorporate_weak_cycles(const LockGraph& g, SchemeState& s, const SchemeOptions& opts = {});

// Empty when H has no solid edge leaving Z and the kept scheme is a Z-deadlock scheme.
std::optional<std::string> invariant_violation(const LockGraph& g, const SchemeState& s);

// Equivalence classes of locks outside Z joined by double solid edges of H.
std::vector<int> eqh_classes(const LockGraph& g, const SchemeState& s);

SchemeResult decide_sufficient_scheme(const LockGraph& g, const SchemeOptions& opts = {});

// {Z: [lock...], ds: {process: {from, to, strength} | null}} over the processes within Z.
json to_json(const LockGraph& g, const DeadlockScheme& s);

struct LocallyLiveDecision {
  bool winning = false;
  std::optional<Strategy> strategy;
  std::optional<DeadlockScheme> scheme;
  std::optional<LockGraph> graph;  // graph of the returned strategy or of the first explored choice
  Behavior2 behavior;
};

LocallyLiveDecision decide_locally_live(const Lss& lss, std::size_t max_combinations = 2'000'000,
                                        const SchemeOptions& opts = {});

}  // namespace lockctl

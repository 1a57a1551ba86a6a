#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lockctl/achieve.hpp"
#include "lockctl/io.hpp"

namespace lockctl {

struct NestedCheck {
  bool nested = true;
  int proc = -1;
  std::vector<int> run;  // transition indices of a shortest local run ending in the bad release
};

// Every process releases only the most recently acquired lock it holds.
NestedCheck check_nested(const Lss& lss);

struct StairDecomposition {
  std::vector<std::vector<Op>> segments;  // one more than stairs
  std::vector<int> stairs;                // the distinguished acquisitions, in order
};

// Cuts at the last acquisitions of the locks held at the end. Throws NotNested.
StairDecomposition stair_decompose(std::span<const Op> run);

// Held locks, requested locks and the generating pairs (a, b) of the order, meaning a
// was last acquired before the last operation on b.
struct StairPattern {
  LockSet owns;
  LockSet blocks;
  std::vector<std::pair<int, int>> order;  // sorted
  auto operator<=>(const StairPattern&) const = default;
};

// Generating pairs recorded in a nested-annotated state.
std::vector<std::pair<int, int>> stair_order(const LocalState& s);

struct StairBehavior {
  std::vector<std::vector<StairPattern>> patterns;  // per process, sorted
};

std::vector<StairPattern> extract_stair_behavior(const Process& p, const AnnotatedProcess& ap,
                                                 const LocalStrategy& strategy);
StairBehavior extract_stair_behavior(const Lss& lss, const Strategy& strategy);

inline constexpr int kMaxNestedLocks = 5;

class StairSpace {
public:
  // Throws NotNested, or LimitExceeded above `max_locks` locks.
  explicit StairSpace(const Process& p, int max_locks = kMaxNestedLocks);

  const Process& process() const { return *proc_; }
  const AnnotatedProcess& graph() const { return ap_; }
  std::size_t size() const { return table_.size(); }
  const StairPattern& pattern(int id) const { return table_.at(id); }
  Classifier classifier() const;
  PatternSet to_set(std::span<const StairPattern> patterns) const;
  std::vector<StairPattern> to_patterns(const PatternSet& set) const;

private:
  const Process* proc_;
  AnnotatedProcess ap_;
  PatternTable<StairPattern> table_;
};

std::optional<LocalStrategy> achievable_nested(const Process& p, std::span<const StairPattern> candidate,
                                               bool locally_live = false);

struct MinimalStairBehavior {
  std::vector<StairPattern> patterns;
  LocalStrategy strategy;
};
std::vector<MinimalStairBehavior> minimal_stair_behaviors(const Process& p, bool locally_live);

struct StairSelection {
  std::vector<StairPattern> chosen;  // one per process
  std::vector<int> order;            // every lock, compatible with all chosen orders
};

std::optional<StairSelection> stair_deadlock_condition(const StairBehavior& b);

struct NestedDecision {
  bool winning = false;
  std::optional<Strategy> strategy;
  std::optional<StairSelection> selection;
  StairBehavior behavior;  // of the returned strategy, or of the first explored choice
};

NestedDecision decide_nested(const Lss& lss, bool locally_live = false,
                             std::size_t max_combinations = 2'000'000);

json to_json(const Lss& lss, const StairBehavior& b);
json to_json(const Lss& lss, const StairSelection& s);

}  // namespace lockctl

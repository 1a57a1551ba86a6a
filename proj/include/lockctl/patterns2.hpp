#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lockctl/achieve.hpp"
#include "lockctl/io.hpp"
#include "lockctl/model.hpp"

namespace lockctl {

// Summary of a risky endpoint: held locks, requested locks, and whether the last lock
// operation was a release while a lock is still held.
struct Pattern2 {
  LockSet owns;
  LockSet blocks;
  bool strong = false;
  auto operator<=>(const Pattern2&) const = default;
};

struct Behavior2 {
  std::vector<LockSet> locks;                   // T_p per process
  std::vector<std::vector<Pattern2>> patterns;  // sorted, duplicate free
};

// Every pattern a process with lock set `locks` could show (13 for two locks).
std::vector<Pattern2> pattern_universe(LockSet locks);

std::vector<Pattern2> extract_behavior(const Process& p, const AnnotatedProcess& ap,
                                       const LocalStrategy& strategy);
Behavior2 extract_behavior(const Lss& lss, const Strategy& strategy);

// Dense ids for the patterns a process can realize under some strategy.
class PatternSpace2 {
public:
  explicit PatternSpace2(const Process& p);

  const Process& process() const { return *proc_; }
  const AnnotatedProcess& graph() const { return ap_; }
  std::size_t size() const { return table_.size(); }
  const Pattern2& pattern(int id) const { return table_.at(id); }
  // The returned classifier refers to this object.
  Classifier classifier() const;
  PatternSet to_set(std::span<const Pattern2> patterns) const;
  std::vector<Pattern2> to_patterns(const PatternSet& set) const;

private:
  const Process* proc_;
  AnnotatedProcess ap_;
  PatternTable<Pattern2> table_;
};

// A local strategy whose behavior stays inside `candidate`, or none.
std::optional<LocalStrategy> achievable(const Process& p, std::span<const Pattern2> candidate,
                                        bool locally_live);

struct MinimalBehavior {
  std::vector<Pattern2> patterns;
  LocalStrategy strategy;
};
std::vector<MinimalBehavior> minimal_behaviors(const Process& p, bool locally_live);

struct DeadlockSelection {
  std::vector<Pattern2> chosen;  // one per process
  std::vector<int> order;        // all locks, smallest first
};

std::optional<DeadlockSelection> deadlock_condition(const Behavior2& b);

struct Decision2 {
  bool winning = false;
  std::optional<Strategy> strategy;
  std::optional<DeadlockSelection> selection;
  Behavior2 behavior;  // behavior of the returned strategy, or of the first explored choice
};

Decision2 decide_general_2lss(const Lss& lss, std::size_t max_combinations = 5'000'000);

// Patterns as {owns, blocks, strength}, keyed by process id.
json to_json(const Lss& lss, const Behavior2& b);
json to_json(const Lss& lss, const DeadlockSelection& s);

}  // namespace lockctl

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lockctl/io.hpp"
#include "lockctl/lockgraph.hpp"

namespace lockctl {

struct ExclusiveCheck {
  bool exclusive = true;
  std::vector<std::pair<int, int>> offending;  // (process, state)
};

// Every state with a get has only transitions performing that same get.
ExclusiveCheck is_exclusive(const Lss& lss);

struct UnavoidableGraph {
  LockGraph graph;           // edges every locally-live strategy of their process induces
  std::vector<bool> forced;  // every strategy induces some edge between the process's two locks
  std::vector<bool> live;    // the process has a locally-live strategy at all
};

UnavoidableGraph unavoidable_graph(const Lss& lss);

enum class SccClass { plain, semi_deadlock, deadlock, direct_semi_deadlock, direct_deadlock };

const char* scc_class_name(SccClass c);

struct SccInfo {
  LockSet locks;
  SccClass kind = SccClass::plain;
  bool all_double = true;
};

struct SccAnalysis {
  std::vector<int> component;  // per lock
  std::vector<SccInfo> sccs;   // numbered by smallest member lock
  LockSet bt;                  // locks of SCCs reaching a direct semi-deadlock SCC
  LockSet ft;
};

// True when the SCC has a cycle whose edges carry pairwise distinct process labels.
bool has_simple_cycle(const LockGraph& g, LockSet scc);

SccAnalysis classify_sccs(const LockGraph& g, const std::vector<bool>& forced);

struct ExclusiveDecision {
  bool winning = false;
  std::optional<Strategy> strategy;
  UnavoidableGraph unavoidable;
  SccAnalysis analysis;
  std::optional<int> free_process;  // a process that can avoid every lock of bt
  bool constructive = true;         // false when the strategy came from the general search
};

// Locally-live mode only. Throws NotExclusive or NotTwoLock.
ExclusiveDecision decide_exclusive(const Lss& lss);

json to_json(const LockGraph& g, const SccAnalysis& a);

}  // namespace lockctl

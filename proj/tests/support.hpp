#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lockctl/generators.hpp"
#include "lockctl/lockgraph.hpp"
#include "lockctl/model.hpp"
#include "lockctl/patterns2.hpp"

namespace testsupport {

using namespace lockctl;

// Lock graph rebuilt from a behavior without the library's graph code.
struct PlainGraph {
  int locks = 0;
  std::vector<LockSet> proc_locks;
  std::vector<LockEdge> edges;
  std::vector<bool> solid;
  std::vector<std::vector<LockSet>> lockable;
};

PlainGraph plain_graph(const Behavior2& b);
PlainGraph plain_graph(const LockGraph& g, std::span<const LockEdge> edges);

// Exhaustive search over Z and the per-lock choice of scheme edges.
std::optional<DeadlockScheme> brute_force_scheme(const PlainGraph& g);

// Independent check of the four conditions for a Z-deadlock scheme over `edges`.
std::optional<std::string> check_scheme(const PlainGraph& g, const DeadlockScheme& s, bool sufficient);

// Solid edge of H from Z to a lock outside Z, if any.
std::optional<LockEdge> solid_edge_leaving(const PlainGraph& g, LockSet z);

// All simple cycles (pairwise distinct labels, distinct vertices), each reported once
// starting from its smallest lock.
std::vector<std::vector<LockEdge>> simple_cycles(const PlainGraph& g);

bool qbf_truth(const QbfInstance& q);

// Every way of writing `run` as u1 get(t1) u2 ... get(tk) u(k+1) with neutral segments
// and u(i) avoiding t1..t(i-1); returns the positions of the distinguished gets.
std::vector<std::vector<int>> all_stair_cuts(std::span<const Op> run);

// Random nested local run over `locks` locks.
std::vector<Op> random_nested_run(std::mt19937_64& rng, int locks, int length);

// Random locally-live-admissible behavior: each process gets two distinct locks and a
// random subset of the patterns with nonempty blocks.
Behavior2 random_behavior(std::mt19937_64& rng, int locks, int procs);

// The nine-process behavior on eight locks of the staged trim/solid-cycle example.
Behavior2 figure_behavior();

// Seven locks: a tree of double solid edges on t1..t6 hanging off t5 -> t7, and Z = {t7, t8}
// held by a weak two-cycle.
struct ReachFixture {
  LockGraph graph;
  SchemeState state;
};
ReachFixture reach_fixture();

Pattern2 pat(LockSet owns, LockSet blocks, bool strong);
inline LockSet locks_of(std::initializer_list<int> ts) {
  LockSet s;
  for (int t : ts) s.insert(t);
  return s;
}

}  // namespace testsupport

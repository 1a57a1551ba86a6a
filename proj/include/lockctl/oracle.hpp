#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lockctl/model.hpp"

namespace lockctl {

struct Limits {
  std::size_t max_processes = 4;
  std::size_t max_states = 1'000'000;
  std::size_t max_candidates = 10'000;       // positional strategies per process
  std::size_t max_combinations = 2'000'000;  // candidate tuples checked by exists_winning_oracle
};

struct OracleVerdict {
  bool winning = false;
  std::optional<Strategy> strategy;
  std::optional<Run> trace;  // deadlocking run, shortest, in Foata normal form
  std::size_t states = 0;    // product configurations explored by the last check
};

// Explores the strategy-restricted product. `ownership` seeds the initial owned sets.
OracleVerdict verify_strategy(const Lss& lss, const Strategy& strategy, const Limits& limits = {},
                              std::span<const LockSet> ownership = {});

struct OracleOptions {
  bool locally_live = false;
  Limits limits;
  std::optional<Annotation> mode;  // default: two_lock for 2LSS, else nested if possible, else owned
  std::vector<LockSet> ownership;
};

// Exhaustive search over positional strategies on annotated states.
OracleVerdict exists_winning_oracle(const Lss& lss, const OracleOptions& opts = {});

// Annotation the oracle uses when none is requested.
Annotation default_annotation(const Lss& lss);

// Throws NotLocallyLive naming a local run that cannot be prolonged.
void check_locally_live(const Lss& lss, const Strategy& strategy,
                        std::span<const LockSet> ownership = {});

// Reorders a run into its Foata normal form: steps grouped by causal depth, each group
// sorted by process index. Steps are dependent when they share a process or a lock.
Run foata_normal_form(const Run& run);

}  // namespace lockctl

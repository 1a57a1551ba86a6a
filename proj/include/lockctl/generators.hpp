#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lockctl/io.hpp"

namespace lockctl {

// Ring of n philosophers; philosopher p needs forks t_p and t_{p+1}. The order of taking
// them is controllable and forks go back in reverse order of acquisition.
Lss gen_philosophers(int n);

// Philosophers that may put a held fork back while waiting for the other one.
Lss gen_flexible_philosophers(int n);

// Philosophers that always take the left fork first.
Lss gen_left_forced_philosophers(int n);

struct Literal {
  bool universal = false;  // y variable, else x
  int var = 0;             // 0-based
  bool negated = false;
  auto operator<=>(const Literal&) const = default;
};

// exists x_1..x_n forall y_1..y_m, disjunction of 3-literal conjunctions.
struct QbfInstance {
  int exists = 0;
  int forall = 0;
  std::vector<std::array<Literal, 3>> clauses;
};

// {exists: [name...], forall: [name...], clauses: [[lit, lit, lit]...]}, "-" marks negation.
QbfInstance qbf_from_json(const json& doc);
json to_json(const QbfInstance& q);

QbfInstance gen_random_qbf(std::uint64_t seed, int exists, int forall, int clauses);

// Has a winning strategy (without local liveness) iff the formula is true.
Lss gen_qbf_gadget(const QbfInstance& q);

struct RandomParams {
  int procs = 2;
  int states = 4;
  int locks = 2;
  int locks_per_process = 2;
  int max_out = 2;
  double p_controllable = 0.5;
  double p_get = 0.5;  // chance that a transition requests a lock when one is available
  bool exclusive = false;
  bool nested = false;
};

// Deterministic in the seed. Every transition respects the lock discipline; with
// `nested` releases always hit the most recent acquisition.
Lss gen_random_lss(std::uint64_t seed, const RandomParams& params);

}  // namespace lockctl

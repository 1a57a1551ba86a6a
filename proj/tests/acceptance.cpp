// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.
#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "lockctl/exclusive.hpp"
#include "lockctl/generators.hpp"
#include "lockctl/initown.hpp"
#include "lockctl/io.hpp"
#include "lockctl/lockgraph.hpp"
#include "lockctl/nested.hpp"
#include "lockctl/oracle.hpp"
#include "support.hpp"

using namespace lockctl;
using namespace testsupport;

namespace {

constexpr double kVerifyBudgetSeconds = 1.0;
constexpr double kPhilosophersBudgetSeconds = 10.0;
constexpr double kQbfBudgetSeconds = 60.0;
constexpr int kBruteForceMaxLocks = 6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string why;  // first failed requirement
  std::ostringstream detail;

  void require(bool ok, const std::string& reason) {
    if (!ok && pass) {
      pass = false;
      why = reason;
    }
  }
};

// Invariant bookkeeping shared by every lock-graph run of criteria 3 to 6.
struct InvariantLog {
  std::size_t runs = 0;
  std::size_t stages = 0;
  std::size_t brute_checks = 0;
  std::vector<std::string> violations;
  bool graph_has_scheme = false;

  SchemeOptions options() {
    SchemeOptions opts;
    opts.observer = [this](const LockGraph& g, const SchemeState& s, const std::string& stage) {
      if (stage == "trim") {
        ++runs;
        if (g.locks <= kBruteForceMaxLocks) graph_has_scheme = brute_force_scheme(plain_graph(g, g.edges)).has_value();
      }
      ++stages;
      PlainGraph h = plain_graph(g, s.h);
      if (auto e = solid_edge_leaving(h, s.scheme.z)) {
        violations.push_back("after " + stage + ": solid edge " + g.edge_text(*e) + " leaves Z");
      }
      if (auto bad = check_scheme(h, s.scheme, false)) {
        violations.push_back("after " + stage + ": kept scheme invalid: " + *bad);
      }
      if (g.locks <= kBruteForceMaxLocks) {
        ++brute_checks;
        if (brute_force_scheme(h).has_value() != graph_has_scheme) {
          violations.push_back("after " + stage + ": H and G disagree on having a sufficient scheme");
        }
      }
    };
    return opts;
  }
};

InvariantLog g_invariants;
int g_exclusive_fallbacks = 0;

Strategy allow_all(const Lss& lss, Annotation mode, bool locally_live) {
  return Strategy{mode, locally_live, std::vector<LocalStrategy>(lss.processes.size())};
}

// True when replaying `run` ends in a configuration without enabled steps.
bool ends_in_deadlock(const Lss& lss, const Run& run, Annotation mode) {
  GlobalConfig cfg = replay(lss, run, mode);
  return enabled(lss, cfg, allow_all(lss, mode, false)).empty();
}

// ---------------------------------------------------------------------------

void criterion1(Outcome& o) {
  Lss lss = gen_philosophers(2);
  json doc = {{"p1", {{{"state", "hungry"}, {"allow", {"left"}}}}},
              {"p2", {{{"state", "hungry"}, {"allow", {"left"}}}}}};
  auto start = Clock::now();
  OracleVerdict v = verify_strategy(lss, strategy_from_json(lss, doc));
  double secs = seconds_since(start);
  std::vector<std::string> got;
  if (v.trace) {
    for (const auto& step : *v.trace) got.push_back(describe(lss, step));
  }
  const std::vector<std::string> want{"p1:hungry", "p2:hungry", "p1:left", "p2:left",
                                      "p1:take_left(get t1)", "p2:take_left(get t2)"};
  o.require(!v.winning, "strategy reported winning");
  o.require(got == want, "unexpected trace");
  o.require(secs < kVerifyBudgetSeconds, "took " + std::to_string(secs) + " s");
  o.detail << "losing, trace of " << got.size() << " steps in " << secs << " s";
}

void criterion2(Outcome& o) {
  auto start = Clock::now();
  for (int n = 2; n <= 5; ++n) {
    Lss lss = gen_philosophers(n);
    ExclusiveDecision d = decide_exclusive(lss);
    o.require(d.winning && d.strategy, "n=" + std::to_string(n) + ": decide_exclusive said NO");
    if (!d.strategy) return;
    if (n <= 4) {
      OracleVerdict v = verify_strategy(lss, *d.strategy);
      o.require(v.winning, "n=" + std::to_string(n) + ": strategy deadlocks");
    }
    PlainGraph g = plain_graph(extract_behavior(lss, *d.strategy));
    for (const auto& cycle : simple_cycles(g)) {
      bool weak = std::any_of(cycle.begin(), cycle.end(), [](const LockEdge& e) { return !e.strong; });
      o.require(!weak, "n=" + std::to_string(n) + ": induced lock graph has a weak simple cycle");
    }
  }
  double secs = seconds_since(start);
  o.require(secs < kPhilosophersBudgetSeconds, "took " + std::to_string(secs) + " s");
  o.detail << "n=2..5 winning, n<=4 verified, no weak simple cycle, " << secs << " s";
}

void criterion3(Outcome& o) {
  for (int n = 2; n <= 4; ++n) {
    const std::string tag = "n=" + std::to_string(n) + ": ";
    Lss lss = gen_left_forced_philosophers(n);
    LocallyLiveDecision d = decide_locally_live(lss, 2'000'000, g_invariants.options());
    o.require(!d.winning, tag + "decide_locally_live said YES");
    o.require(d.scheme && d.graph, tag + "no scheme returned");
    if (!d.scheme || !d.graph) return;
    LockSet all;
    for (int t = 0; t < n; ++t) all.insert(t);
    o.require(d.scheme->z == all, tag + "Z is not the set of all forks");
    o.require(!check_scheme(plain_graph(*d.graph, d.graph->edges), *d.scheme, true), tag + "scheme is not sufficient");
    OracleOptions opts;
    opts.locally_live = true;
    OracleVerdict v = exists_winning_oracle(lss, opts);
    o.require(!v.winning, tag + "oracle found a winning strategy");
    o.require(v.trace && ends_in_deadlock(lss, *v.trace, default_annotation(lss)), tag + "oracle trace is not a deadlock");
  }
  o.detail << "n=2..4 losing with Z = all forks, oracle traces replay to deadlocks";
}

void criterion4(Outcome& o) {
  LockGraph g = build_lock_graph(figure_behavior());
  SchemeResult r = decide_sufficient_scheme(g);
  const std::vector<std::string> want{
      "trim: no change",
      "solid-cycles: absorb t1 =p1=> t2 -p2-> t3 =p3=> t1",
      "solid-cycles: absorb t4 =p4=> t5 -p5-> t6 =p6=> t4",
      "trim: erase t8 =p8=> t7",
      "trim: fail at t7: t7 =p7=> t1 and t7 =p8=> t8 are both solo solid",
      "result: no sufficient deadlock scheme",
  };
  o.require(!r.scheme, "a scheme was found");
  o.require(r.state.trace == want, "stage trace differs");
  if (!o.pass) {
    for (const auto& line : r.state.trace) o.why += "\n    " + line;
    return;
  }
  o.detail << "no sufficient deadlock scheme, " << want.size() << "-line stage trace matches";
}

void criterion5(Outcome& o) {
  // Ten true and ten false formulas, picked by brute-force truth from a seeded stream.
  auto start = Clock::now();
  int wanted[2] = {10, 10};
  int count = 0;
  for (std::uint64_t seed = 1; wanted[0] + wanted[1] > 0; ++seed) {
    const int exists = 1 + static_cast<int>(seed % 3);
    const int forall = 1 + static_cast<int>((seed / 3) % 3);
    const int clauses = 1 + static_cast<int>((seed / 9) % 3);
    QbfInstance q = gen_random_qbf(seed, exists, forall, clauses);
    bool truth = qbf_truth(q);
    if (wanted[truth] == 0) continue;
    --wanted[truth];
    Decision2 d = decide_general_2lss(gen_qbf_gadget(q));
    o.require(d.winning == truth, "formula " + to_json(q).dump() + ": verdict differs from truth");
    ++count;
    if (seed > 100'000) {
      o.require(false, "could not find a balanced corpus");
      return;
    }
  }
  double secs = seconds_since(start);
  o.require(secs < kQbfBudgetSeconds, "took " + std::to_string(secs) + " s");
  o.detail << count << " formulas (10 true, 10 false), all verdicts match, " << secs << " s";
}

RandomParams small_params(std::uint64_t seed) {
  RandomParams rp;
  rp.procs = 2 + static_cast<int>(seed % 2);
  rp.states = 3 + static_cast<int>((seed / 2) % 4);
  rp.locks = 2 + static_cast<int>((seed / 8) % 3);
  rp.max_out = 2 + static_cast<int>((seed / 24) % 2);
  rp.p_controllable = (seed / 48) % 2 ? 0.5 : 0.2;
  rp.p_get = 0.8;
  return rp;
}

bool every_process_live(const Lss& lss) {
  return std::all_of(lss.processes.begin(), lss.processes.end(),
                     [](const Process& p) { return locally_live_strategy(p).has_value(); });
}

// Runs `check` on seeded instances until half of `want` winning and half losing ones fit
// the oracle limits. Every instance checked on the way must agree, counted or not.
template <class Make, class Check>
void corpus(Outcome& o, const std::string& name, int want, std::uint64_t first_seed, Make make, Check check,
            std::ostringstream& summary) {
  int need[2] = {want / 2, want - want / 2};
  int checked = 0;
  int skipped = 0;
  for (std::uint64_t seed = first_seed; need[0] + need[1] > 0; ++seed) {
    if (seed > first_seed + 200'000) {
      o.require(false, name + ": not enough instances of each verdict within limits");
      return;
    }
    std::optional<Lss> lss = make(seed);
    if (!lss) continue;
    try {
      std::optional<bool> verdict = check(*lss, seed);
      if (!verdict) {
        o.require(false, name + " seed " + std::to_string(seed) + ": procedures disagree");
        return;
      }
      ++checked;
      if (need[*verdict] > 0) --need[*verdict];
    } catch (const Error& e) {
      if (e.code() != Errc::limit_exceeded) throw;
      ++skipped;
    }
  }
  summary << name << " " << want << " (" << want - want / 2 << " winning; " << checked << " checked, " << skipped
          << " over limits); ";
}

void criterion6(Outcome& o) {
  std::ostringstream summary;
  corpus(
      o, "general", 200, 1000,
      [](std::uint64_t seed) -> std::optional<Lss> { return gen_random_lss(seed, small_params(seed)); },
      [](const Lss& lss, std::uint64_t) -> std::optional<bool> {
        bool oracle = exists_winning_oracle(lss).winning;
        if (decide_general_2lss(lss).winning != oracle) return std::nullopt;
        return oracle;
      },
      summary);
  if (!o.pass) return;
  corpus(
      o, "locally-live", 200, 5000,
      [](std::uint64_t seed) -> std::optional<Lss> {
        Lss lss = gen_random_lss(seed, small_params(seed));
        if (!every_process_live(lss)) return std::nullopt;
        return lss;
      },
      [](const Lss& lss, std::uint64_t) -> std::optional<bool> {
        OracleOptions opts;
        opts.locally_live = true;
        bool oracle = exists_winning_oracle(lss, opts).winning;
        if (decide_locally_live(lss, 2'000'000, g_invariants.options()).winning != oracle) return std::nullopt;
        return oracle;
      },
      summary);
  if (!o.pass) return;
  corpus(
      o, "exclusive", 100, 9000,
      [](std::uint64_t seed) -> std::optional<Lss> {
        RandomParams rp = small_params(seed);
        rp.exclusive = true;
        return gen_random_lss(seed, rp);
      },
      [](const Lss& lss, std::uint64_t) -> std::optional<bool> {
        OracleOptions opts;
        opts.locally_live = true;
        bool oracle = exists_winning_oracle(lss, opts).winning;
        ExclusiveDecision ex = decide_exclusive(lss);
        if (!ex.constructive) ++g_exclusive_fallbacks;
        bool live = decide_locally_live(lss, 2'000'000, g_invariants.options()).winning;
        if (ex.winning != oracle || live != oracle) return std::nullopt;
        if (ex.winning && !verify_strategy(lss, *ex.strategy).winning) return std::nullopt;
        return oracle;
      },
      summary);
  o.detail << summary.str() << "zero disagreements; exclusive strategies from the general search: "
           << g_exclusive_fallbacks;
}

void criterion7(Outcome& o) {
  std::ostringstream summary;
  corpus(
      o, "nested", 100, 20000,
      [](std::uint64_t seed) -> std::optional<Lss> {
        RandomParams rp;
        rp.procs = seed % 4 == 0 ? 1 : 2;
        rp.states = 3 + static_cast<int>((seed / 4) % 3);
        rp.locks = 2 + static_cast<int>((seed / 12) % 3);
        rp.locks_per_process = 2 + static_cast<int>((seed / 36) % 2);
        rp.p_controllable = (seed / 72) % 2 ? 0.5 : 0.2;
        rp.p_get = 0.8;
        rp.nested = true;
        return gen_random_lss(seed, rp);
      },
      [](const Lss& lss, std::uint64_t) -> std::optional<bool> {
        bool oracle = exists_winning_oracle(lss).winning;
        NestedDecision d = decide_nested(lss);
        if (d.winning != oracle) return std::nullopt;
        if (d.winning && !verify_strategy(lss, *d.strategy).winning) return std::nullopt;
        return oracle;
      },
      summary);
  if (!o.pass) return;

  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Op> run = random_nested_run(rng, 4, 1 + i % 14);
    StairDecomposition d = stair_decompose(run);
    std::vector<int> cut;
    int pos = 0;
    for (std::size_t k = 0; k < d.stairs.size(); ++k) {
      pos += static_cast<int>(d.segments[k].size());
      cut.push_back(pos);
      ++pos;
    }
    auto all = all_stair_cuts(run);
    o.require(all.size() == 1 && all.front() == cut, "run " + std::to_string(i) + ": decomposition not unique or differs");
    if (!o.pass) return;
  }
  o.detail << summary.str() << "1000 runs with a unique stair decomposition";
}

void criterion8(Outcome& o) {
  std::mt19937_64 rng(11);
  int done = 0;
  int winning = 0;
  for (std::uint64_t seed = 30000; done < 50; ++seed) {
    RandomParams rp;
    rp.procs = 1 + static_cast<int>(seed % 2);
    rp.states = 2 + static_cast<int>((seed / 2) % 3);
    rp.locks = 2 + static_cast<int>((seed / 6) % 2);
    Lss lss = gen_random_lss(seed, rp);
    InitOwnership own(lss.processes.size());
    LockSet taken;
    for (std::size_t p = 0; p < lss.processes.size(); ++p) {
      for (int t : lss.processes[p].locks - taken) {
        if (std::bernoulli_distribution(0.4)(rng)) own[p].insert(t);
      }
      taken |= own[p];
    }
    Lss tr = transform_init(lss, own);
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    o.require(tr.locks.size() == lss.locks.size() + lss.processes.size(), tag + "wrong number of key locks");
    const std::size_t n = lss.processes.size();
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t added = tr.processes[p].states.size() - lss.processes[p].states.size();
      o.require(added == static_cast<std::size_t>(own[p].size()) + 2 * (n - 1) + 1, tag + "prologue size off");
    }
    try {
      OracleOptions direct;
      direct.mode = Annotation::owned;
      direct.ownership = own;
      OracleOptions plain;
      plain.mode = Annotation::owned;
      bool a = exists_winning_oracle(lss, direct).winning;
      bool b = exists_winning_oracle(tr, plain).winning;
      o.require(a == b, tag + "transformed verdict differs");
      winning += a;
      ++done;
    } catch (const Error& e) {
      if (e.code() != Errc::limit_exceeded) throw;
    }
    if (!o.pass) return;
  }
  o.detail << done << " instances (" << winning << " winning) agree; |Proc| keys and |I_p|+2|Proc|-1 prologue states each";
}

void criterion9(Outcome& o) {
  // Add a randomized corpus of behaviors on at most six locks.
  std::mt19937_64 rng(5);
  int with_scheme = 0;
  for (int i = 0; i < 400; ++i) {
    Behavior2 b = random_behavior(rng, 2 + i % 5, 1 + i % 8);
    LockGraph g = build_lock_graph(b);
    SchemeResult r = decide_sufficient_scheme(g, g_invariants.options());
    auto brute = brute_force_scheme(plain_graph(b));
    o.require(r.scheme.has_value() == brute.has_value(), "behavior " + std::to_string(i) + ": disagrees with brute force");
    if (r.scheme) {
      o.require(!check_scheme(plain_graph(b), *r.scheme, true), "behavior " + std::to_string(i) + ": returned scheme invalid");
    }
    with_scheme += brute.has_value();
  }
  o.require(g_invariants.violations.empty(),
            g_invariants.violations.empty() ? "" : g_invariants.violations.front());
  o.require(g_invariants.stages > 0, "no stage was observed");
  o.detail << g_invariants.runs << " runs, " << g_invariants.stages << " stages checked, " << g_invariants.brute_checks
           << " brute-force equi-existence checks; random corpus 400 graphs (" << with_scheme << " with a scheme)";
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9},
  };
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    auto start = Clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << (o.pass ? o.detail.str() : o.why) << " ["
              << seconds_since(start) << " s]" << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}

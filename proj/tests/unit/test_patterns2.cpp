#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "lockctl/generators.hpp"
#include "lockctl/oracle.hpp"
#include "lockctl/patterns2.hpp"
#include "../support.hpp"
#include "util.hpp"

using namespace unit;
using testsupport::pat;
using testsupport::qbf_truth;

namespace {

const LockSet kT1 = LockSet::single(0);
const LockSet kT2 = LockSet::single(1);

bool subset(const std::vector<Pattern2>& a, const std::vector<Pattern2>& b) {
  return std::all_of(a.begin(), a.end(), [&](const Pattern2& x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

// get t1, get t2, rel t2, get t2 again; the final state idles.
Lss climbing_process() {
  return make_lss({"t1", "t2"}, {{"p", {"s0", "s1", "s2", "s3", "s4"},
                                  {{"s0", "a", Op::get(0), "s1"},
                                   {"s1", "b", Op::get(1), "s2"},
                                   {"s2", "c", Op::rel(1), "s3"},
                                   {"s3", "d", Op::get(1), "s4"},
                                   {"s4", "e", Op::nop(), "s4"}},
                                  {}}});
}

// Every positional strategy on the reachable annotated states, by brute force.
void for_each_strategy(const Process& p, const AnnotatedProcess& ap, const std::function<void(const LocalStrategy&)>& visit) {
  std::vector<std::vector<ActionSet>> options(ap.nodes.size());
  for (std::size_t n = 0; n < ap.nodes.size(); ++n) {
    ActionSet ctrl = 0;
    for (const auto& e : ap.out[n]) {
      int a = p.transitions[e.transition].action;
      if (p.controllable[a]) ctrl |= ActionSet{1} << a;
    }
    for (ActionSet sub = ctrl;; sub = (sub - 1) & ctrl) {
      options[n].push_back(sub);
      if (sub == 0) break;
    }
  }
  LocalStrategy s;
  std::function<void(std::size_t)> rec = [&](std::size_t n) {
    if (n == ap.nodes.size()) {
      visit(s);
      return;
    }
    for (ActionSet m : options[n]) {
      s.exact[ap.nodes[n]] = m;
      rec(n + 1);
    }
  };
  rec(0);
}

// Every reachable annotated state keeps an allowed move.
bool locally_live(const Process& p, const LocalStrategy& s, Annotation mode) {
  AnnotatedProcess ap = annotate(p, mode, {}, &s);
  for (std::size_t n = 0; n < ap.nodes.size(); ++n) {
    if (ap.out[n].empty()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pattern universe of a two-lock process has 13 elements") {
  auto u = pattern_universe(kT1 | kT2);
  CHECK(u.size() == 13);
  for (const auto& x : u) {
    CHECK_FALSE(x.owns.intersects(x.blocks));
    if (x.strong) CHECK(x.owns.size() == 1);
  }
}

TEST_CASE("pattern extraction") {
  SUBCASE("release then request again gives a strong pattern") {
    Lss lss = climbing_process();
    const Process& p = lss.processes[0];
    auto got = extract_behavior(p, annotate(p, Annotation::two_lock), LocalStrategy{});
    CHECK(got == std::vector<Pattern2>{pat({}, kT1, false), pat(kT1, kT2, false), pat(kT1, kT2, true)});
  }
  SUBCASE("choice of two gets without locks is weak") {
    Lss lss = make_lss({"t1", "t2"}, {{"p", {"s0", "s1", "s2"},
                                       {{"s0", "a", Op::get(0), "s1"},
                                        {"s0", "b", Op::get(1), "s2"},
                                        {"s1", "c", Op::rel(0), "s0"},
                                        {"s2", "d", Op::rel(1), "s0"}},
                                       {}}});
    const Process& p = lss.processes[0];
    auto got = extract_behavior(p, annotate(p, Annotation::two_lock), LocalStrategy{});
    CHECK(got == std::vector<Pattern2>{pat({}, kT1 | kT2, false)});
  }
  SUBCASE("nop loops give no pattern") {
    Lss lss = make_lss({}, {{"p", {"s", "u"}, {{"s", "a", Op::nop(), "u"}, {"u", "b", Op::nop(), "s"}}, {}}});
    const Process& p = lss.processes[0];
    CHECK(extract_behavior(p, annotate(p, Annotation::two_lock), LocalStrategy{}).empty());
  }
}

TEST_CASE("achievability on the philosopher") {
  Lss lss = gen_philosophers(2);
  const Process& p = lss.processes[0];
  const int left = p.action_index("left");
  const int right = p.action_index("right");
  const int hungry = p.state_index("hungry");

  SUBCASE("the full universe keeps the allow-all behavior") {
    auto s = achievable(p, pattern_universe(p.locks), false);
    REQUIRE(s);
    AnnotatedProcess ap = annotate(p, Annotation::two_lock);
    CHECK(extract_behavior(p, ap, *s) == extract_behavior(p, ap, LocalStrategy{}));
    for (const auto& n : annotate(p, Annotation::two_lock, {}, &*s).nodes) {
      if (n.base == hungry) CHECK(s->allowed_controllable(p, n) == ((ActionSet{1} << left) | (ActionSet{1} << right)));
    }
  }
  SUBCASE("forbidding t1 to t2 leaves only the right branch") {
    std::vector<Pattern2> cand;
    for (const auto& x : pattern_universe(p.locks)) {
      if (!(x.owns == kT1 && x.blocks == kT2)) cand.push_back(x);
    }
    auto s = achievable(p, cand, true);
    REQUIRE(s);
    int seen = 0;
    for (const auto& n : annotate(p, Annotation::two_lock, {}, &*s).nodes) {
      if (n.base != hungry) continue;
      ++seen;
      CHECK(s->allowed_controllable(p, n) == (ActionSet{1} << right));
    }
    CHECK(seen == 1);
  }
  SUBCASE("a locally-live philosopher must hold a fork while waiting") {
    std::vector<Pattern2> cand;
    for (const auto& x : pattern_universe(p.locks)) {
      if (x.owns.empty()) cand.push_back(x);
    }
    CHECK_FALSE(achievable(p, cand, true));
  }
}

TEST_CASE("deadlock condition") {
  Behavior2 weak{{kT1 | kT2, kT1 | kT2}, {{pat(kT1, kT2, false)}, {pat(kT2, kT1, false)}}};
  auto sel = deadlock_condition(weak);
  REQUIRE(sel);
  CHECK(sel->chosen.size() == 2);
  CHECK(sel->order.size() == 2);

  Behavior2 strong{{kT1 | kT2, kT1 | kT2}, {{pat(kT1, kT2, true)}, {pat(kT2, kT1, true)}}};
  CHECK_FALSE(deadlock_condition(strong));

  Behavior2 uncovered{{kT1 | kT2, kT1 | kT2}, {{pat({}, kT2, false)}, {pat({}, kT1, false)}}};
  CHECK_FALSE(deadlock_condition(uncovered));
}

TEST_CASE("fewer patterns never create a deadlock selection") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution drop(0.3);
  int checked = 0;
  for (int k = 0; k < 400; ++k) {
    Behavior2 b = testsupport::random_behavior(rng, 2 + k % 4, 1 + k % 5);
    if (deadlock_condition(b)) continue;
    ++checked;
    Behavior2 smaller = b;
    for (auto& ps : smaller.patterns) std::erase_if(ps, [&](const Pattern2&) { return drop(rng); });
    CHECK_FALSE(deadlock_condition(smaller));
  }
  CHECK(checked > 50);
}

TEST_CASE("winning iff no deadlock selection in the extracted behavior") {
  std::mt19937_64 rng(17);
  int winning = 0;
  int losing = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    RandomParams rp;
    rp.procs = 2 + static_cast<int>(seed % 2);
    rp.states = 3 + static_cast<int>(seed % 4);
    rp.locks = 2 + static_cast<int>(seed % 3);
    rp.p_get = 0.8;
    rp.p_controllable = 0.5;
    Lss lss = gen_random_lss(seed, rp);
    Strategy s = random_strategy(rng, lss, Annotation::two_lock);
    bool win = verify_strategy(lss, s).winning;
    (win ? winning : losing) += 1;
    CHECK(win == !deadlock_condition(extract_behavior(lss, s)).has_value());
  }
  CHECK(winning > 10);
  CHECK(losing > 10);
}

TEST_CASE("achievable agrees with strategy enumeration") {
  std::mt19937_64 rng(23);
  int compared = 0;
  for (std::uint64_t seed = 1; compared < 60 && seed < 2000; ++seed) {
    RandomParams rp;
    rp.procs = 1;
    rp.states = 3 + static_cast<int>(seed % 3);
    rp.locks = 2;
    rp.p_controllable = 0.6;
    rp.p_get = 0.7;
    Lss lss = gen_random_lss(seed, rp);
    const Process& p = lss.processes[0];
    AnnotatedProcess ap = annotate(p, Annotation::two_lock);
    if (ap.nodes.size() > 6) continue;
    ++compared;
    auto universe = pattern_universe(p.locks);
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<Pattern2> cand;
      for (const auto& x : universe) {
        if (std::bernoulli_distribution(0.5)(rng)) cand.push_back(x);
      }
      for (bool live : {false, true}) {
        bool brute = false;
        for_each_strategy(p, ap, [&](const LocalStrategy& s) {
          if (brute) return;
          if (live && !locally_live(p, s, Annotation::two_lock)) return;
          brute = subset(extract_behavior(p, ap, s), cand);
        });
        auto got = achievable(p, cand, live);
        CHECK(got.has_value() == brute);
        if (got) {
          CHECK(subset(extract_behavior(p, ap, *got), cand));
          if (live) CHECK(locally_live(p, *got, Annotation::two_lock));
        }
      }
    }
  }
  CHECK(compared == 60);
}

TEST_CASE("general decision on known systems") {
  CHECK(decide_general_2lss(gen_philosophers(2)).winning);

  QbfInstance truth;
  truth.exists = 1;
  truth.forall = 1;
  truth.clauses.push_back({Literal{false, 0, false}, Literal{false, 0, false}, Literal{false, 0, false}});
  REQUIRE(qbf_truth(truth));
  Decision2 yes = decide_general_2lss(gen_qbf_gadget(truth));
  CHECK(yes.winning);
  REQUIRE(yes.strategy);
  CHECK(verify_strategy(gen_qbf_gadget(truth), *yes.strategy).winning);

  QbfInstance lie = truth;
  lie.clauses[0] = {Literal{true, 0, false}, Literal{true, 0, false}, Literal{true, 0, false}};
  REQUIRE_FALSE(qbf_truth(lie));
  Decision2 no = decide_general_2lss(gen_qbf_gadget(lie));
  CHECK_FALSE(no.winning);
  CHECK(no.selection);
}

TEST_CASE("behavior documents list patterns per process") {
  Lss lss = gen_philosophers(2);
  Behavior2 b = extract_behavior(lss, allow_all(lss, Annotation::two_lock));
  json doc = to_json(lss, b);
  REQUIRE(doc.contains("p1"));
  for (const auto& x : doc["p1"]) {
    CHECK(x.contains("owns"));
    CHECK(x.contains("blocks"));
    CHECK((x["strength"] == "weak" || x["strength"] == "strong"));
  }
}

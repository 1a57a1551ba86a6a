#include "lockctl/generators.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace lockctl {

namespace {

enum class Variant { plain, flexible, left_forced };

Lss philosophers(int n, Variant v) {
  if (n < 2) throw Error(Errc::invalid_argument, "a philosopher ring needs at least two philosophers");
  LssBuilder b;
  for (int i = 1; i <= n; ++i) b.add_lock("t" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    const int left = i;
    const int right = (i + 1) % n;
    int p = b.add_process("p" + std::to_string(i + 1));
    std::vector<std::string> states{"think", "hungry", "want_left", "hold_left"};
    if (v != Variant::left_forced) {
      states.insert(states.end(), {"want_right", "hold_right"});
    }
    if (v == Variant::flexible) {
      states.insert(states.end(), {"eat", "put"});
    } else {
      states.insert(states.end(), {"eat_left", "put_left"});
      if (v != Variant::left_forced) states.insert(states.end(), {"eat_right", "put_right"});
    }
    for (const auto& s : states) b.add_state(p, s);
    b.add_transition(p, "think", "think", Op::nop(), "think", false);
    b.add_transition(p, "think", "hungry", Op::nop(), "hungry", false);
    b.add_transition(p, "hungry", "left", Op::nop(), "want_left", true);
    b.add_transition(p, "want_left", "take_left", Op::get(left), "hold_left", false);
    if (v != Variant::left_forced) {
      b.add_transition(p, "hungry", "right", Op::nop(), "want_right", true);
      b.add_transition(p, "want_right", "take_right", Op::get(right), "hold_right", false);
    }
    if (v == Variant::flexible) {
      b.add_transition(p, "hold_left", "take_right", Op::get(right), "eat", false);
      b.add_transition(p, "hold_right", "take_left", Op::get(left), "eat", false);
      b.add_transition(p, "hold_left", "back_off", Op::rel(left), "hungry", false);
      b.add_transition(p, "hold_right", "back_off", Op::rel(right), "hungry", false);
      b.add_transition(p, "eat", "put_left", Op::rel(left), "put", false);
      b.add_transition(p, "put", "put_right", Op::rel(right), "think", false);
      continue;
    }
    b.add_transition(p, "hold_left", "take_right", Op::get(right), "eat_left", false);
    b.add_transition(p, "eat_left", "put_right", Op::rel(right), "put_left", false);
    b.add_transition(p, "put_left", "put_left", Op::rel(left), "think", false);
    if (v != Variant::left_forced) {
      b.add_transition(p, "hold_right", "take_left", Op::get(left), "eat_right", false);
      b.add_transition(p, "eat_right", "put_left", Op::rel(left), "put_right", false);
      b.add_transition(p, "put_right", "put_right", Op::rel(right), "think", false);
    }
  }
  return b.build();
}

std::string var_name(bool universal, int var) { return (universal ? "y" : "x") + std::to_string(var + 1); }

std::string lock_of(const Literal& l) { return (l.negated ? "n" : "") + var_name(l.universal, l.var); }

}  // namespace

Lss gen_philosophers(int n) { return philosophers(n, Variant::plain); }
Lss gen_flexible_philosophers(int n) { return philosophers(n, Variant::flexible); }
Lss gen_left_forced_philosophers(int n) { return philosophers(n, Variant::left_forced); }

QbfInstance qbf_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::parse, "formula document must be an object");
  QbfInstance q;
  std::map<std::string, std::pair<bool, int>> vars;
  for (auto [key, universal] : {std::pair{"exists", false}, std::pair{"forall", true}}) {
    if (!doc.contains(key)) continue;
    if (!doc[key].is_array()) throw Error(Errc::parse, std::string("'") + key + "' must be a list");
    int& count = universal ? q.forall : q.exists;
    for (const auto& v : doc[key]) {
      if (!v.is_string()) throw Error(Errc::parse, "variable names must be strings");
      if (!vars.emplace(v.get<std::string>(), std::pair{universal, count}).second) {
        throw Error(Errc::parse, "variable '" + v.get<std::string>() + "' declared twice");
      }
      ++count;
    }
  }
  if (!doc.contains("clauses") || !doc["clauses"].is_array()) throw Error(Errc::parse, "missing 'clauses' list");
  for (const auto& c : doc["clauses"]) {
    if (!c.is_array() || c.size() != 3) throw Error(Errc::parse, "each clause needs exactly three literals");
    std::array<Literal, 3> clause;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!c[k].is_string()) throw Error(Errc::parse, "literals must be strings");
      std::string name = c[k].get<std::string>();
      bool negated = !name.empty() && name.front() == '-';
      if (negated) name.erase(0, 1);
      auto it = vars.find(name);
      if (it == vars.end()) throw Error(Errc::parse, "undeclared variable '" + name + "'");
      clause[k] = Literal{it->second.first, it->second.second, negated};
    }
    q.clauses.push_back(clause);
  }
  return q;
}

json to_json(const QbfInstance& q) {
  json ex = json::array();
  json fa = json::array();
  for (int i = 0; i < q.exists; ++i) ex.push_back(var_name(false, i));
  for (int j = 0; j < q.forall; ++j) fa.push_back(var_name(true, j));
  json clauses = json::array();
  for (const auto& c : q.clauses) {
    json lits = json::array();
    for (const auto& l : c) lits.push_back((l.negated ? "-" : "") + var_name(l.universal, l.var));
    clauses.push_back(lits);
  }
  return {{"exists", ex}, {"forall", fa}, {"clauses", clauses}};
}

QbfInstance gen_random_qbf(std::uint64_t seed, int exists, int forall, int clauses) {
  if (exists + forall == 0) throw Error(Errc::invalid_argument, "a random formula needs a variable");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, exists + forall - 1);
  std::bernoulli_distribution coin(0.5);
  QbfInstance q{exists, forall, {}};
  for (int k = 0; k < clauses; ++k) {
    std::array<Literal, 3> c;
    for (auto& l : c) {
      int v = pick(rng);
      l = Literal{v >= exists, v >= exists ? v - exists : v, coin(rng)};
    }
    q.clauses.push_back(c);
  }
  return q;
}

Lss gen_qbf_gadget(const QbfInstance& q) {
  LssBuilder b;
  const int k = static_cast<int>(q.clauses.size());
  for (int i = 1; i <= k; ++i) b.add_lock("t" + std::to_string(i));
  for (int i = 0; i < q.exists; ++i) {
    b.add_lock(var_name(false, i));
    b.add_lock("n" + var_name(false, i));
  }
  for (int j = 0; j < q.forall; ++j) {
    b.add_lock(var_name(true, j));
    b.add_lock("n" + var_name(true, j));
  }
  Lss shell;  // lock indices only
  {
    Lss tmp = b.build();
    shell.locks = tmp.locks;
  }
  auto lock = [&](const std::string& name) { return shell.lock_index(name); };

  for (int i = 0; i < q.exists; ++i) {
    const std::string x = var_name(false, i);
    int p = b.add_process("p_" + x);
    for (const char* s : {"s0", "s1", "s2", "s3", "s4", "s5"}) b.add_state(p, s);
    b.add_transition(p, "s0", "take_" + x, Op::get(lock(x)), "s1", false);
    b.add_transition(p, "s1", "take_n" + x, Op::get(lock("n" + x)), "s2", false);
    b.add_transition(p, "s2", "free_" + x, Op::nop(), "s3", true);
    b.add_transition(p, "s2", "free_n" + x, Op::nop(), "s4", true);
    b.add_transition(p, "s3", "rel_" + x, Op::rel(lock(x)), "s5", false);
    b.add_transition(p, "s4", "rel_n" + x, Op::rel(lock("n" + x)), "s5", false);
  }
  for (int j = 0; j < q.forall; ++j) {
    const std::string y = var_name(true, j);
    int p = b.add_process("q_" + y);
    for (const char* s : {"s0", "s1", "s2", "s3"}) b.add_state(p, s);
    b.add_transition(p, "s0", "pick_" + y, Op::nop(), "s1", false);
    b.add_transition(p, "s0", "pick_n" + y, Op::nop(), "s2", false);
    b.add_transition(p, "s1", "take_" + y, Op::get(lock(y)), "s3", false);
    b.add_transition(p, "s2", "take_n" + y, Op::get(lock("n" + y)), "s3", false);
  }
  for (int i = 0; i < k; ++i) {
    const std::string t = "t" + std::to_string(i + 1);
    int p = b.add_process("clause" + std::to_string(i + 1));
    b.add_state(p, "s0");
    b.add_state(p, "s1");
    b.add_transition(p, "s0", "take_" + t, Op::get(lock(t)), "s1", false);
    b.add_transition(p, "s1", "loop", Op::nop(), "s1", false);
    for (int l = 0; l < 3; ++l) {
      const std::string lit = lock_of(q.clauses[i][l]);
      int r = b.add_process("clause" + std::to_string(i + 1) + "_lit" + std::to_string(l + 1));
      for (const char* s : {"s0", "s1", "s2"}) b.add_state(r, s);
      b.add_transition(r, "s0", "take_" + t, Op::get(lock(t)), "s1", false);
      b.add_transition(r, "s1", "take_" + lit, Op::get(lock(lit)), "s2", false);
      b.add_transition(r, "s2", "loop", Op::nop(), "s2", false);
    }
  }
  return b.build();
}

Lss gen_random_lss(std::uint64_t seed, const RandomParams& params) {
  if (params.procs < 0 || params.states < 1 || params.locks < 0 || params.max_out < 1) {
    throw Error(Errc::invalid_argument, "random system parameters out of range");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto pick = [&](const std::vector<int>& v) { return v[uniform(0, static_cast<int>(v.size()) - 1)]; };
  std::bernoulli_distribution controllable(params.p_controllable);
  std::bernoulli_distribution want_get(params.p_get);

  LssBuilder b;
  for (int t = 1; t <= params.locks; ++t) b.add_lock("t" + std::to_string(t));
  std::vector<int> pool(params.locks);
  for (int t = 0; t < params.locks; ++t) pool[t] = t;

  for (int i = 0; i < params.procs; ++i) {
    int p = b.add_process("p" + std::to_string(i + 1));
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> mine(pool.begin(), pool.begin() + std::min(params.locks_per_process, params.locks));
    std::sort(mine.begin(), mine.end());
    std::vector<std::string> decl;
    for (int t : mine) decl.push_back("t" + std::to_string(t + 1));
    b.declare_locks(p, decl);

    const int n = params.states;
    for (int s = 0; s < n; ++s) b.add_state(p, "s" + std::to_string(s));

    // The states form a cycle s0 -> s1 -> ... -> s0 that takes and returns locks, so each
    // state has fixed holdings (in acquisition order). Extra transitions jump between
    // states whose holdings fit the operation; no transition breaks the lock discipline.
    std::vector<std::vector<int>> held(n);
    auto free_locks = [&](const std::vector<int>& h) {
      std::vector<int> out;
      for (int t : mine) {
        if (std::find(h.begin(), h.end(), t) == h.end()) out.push_back(t);
      }
      return out;
    };
    auto after = [&](std::vector<int> h, Op op) {
      if (op.is_get()) h.push_back(op.lock);
      if (op.is_rel()) h.erase(std::find(h.begin(), h.end(), op.lock));
      return h;
    };
    auto release_of = [&](const std::vector<int>& h) { return Op::rel(params.nested ? h.back() : pick(h)); };
    std::vector<Op> cycle(n);
    for (int s = 0; s < n; ++s) {
      const std::vector<int>& h = held[s];
      const int remaining = n - s;
      std::vector<int> free = free_locks(h);
      Op op;
      if (static_cast<int>(h.size()) >= remaining) op = release_of(h);
      else if (!free.empty() && static_cast<int>(h.size()) + 2 <= remaining && (h.empty() || want_get(rng)))
        op = Op::get(pick(free));
      else if (!h.empty() && uniform(0, 1) == 0) op = release_of(h);
      cycle[s] = op;
      if (s + 1 < n) held[s + 1] = after(h, op);
    }
    auto targets = [&](const std::vector<int>& h) {
      std::vector<int> out;
      for (int s = 0; s < n; ++s) {
        std::vector<int> a = held[s];
        std::vector<int> c = h;
        if (!params.nested) {
          std::sort(a.begin(), a.end());
          std::sort(c.begin(), c.end());
        }
        if (a == c) out.push_back(s);
      }
      return out;
    };

    for (int s = 0; s < n; ++s) {
      auto add = [&](int k, Op op, int dst) {
        const std::string action = "a" + std::to_string(s) + "_" + std::to_string(k);
        b.add_transition(p, "s" + std::to_string(s), action, op, "s" + std::to_string(dst), controllable(rng));
      };
      add(0, cycle[s], (s + 1) % n);
      const int extra = uniform(0, params.max_out - 1);
      for (int k = 1; k <= extra; ++k) {
        Op op;
        std::vector<int> free = free_locks(held[s]);
        // An exclusive state either requests one lock on every transition or requests none.
        if (params.exclusive && cycle[s].is_get()) op = cycle[s];
        else if (!params.exclusive && !free.empty() && want_get(rng)) op = Op::get(pick(free));
        else if (!held[s].empty() && uniform(0, 1) == 0) op = release_of(held[s]);
        std::vector<int> to = targets(after(held[s], op));
        if (to.empty()) continue;
        add(k, op, pick(to));
      }
    }
  }
  return b.build();
}

}  // namespace lockctl

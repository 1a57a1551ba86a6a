#include "lockctl/model.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace lockctl {

int Process::state_index(std::string_view name) const {
  auto it = std::find(states.begin(), states.end(), name);
  return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

int Process::action_index(std::string_view name) const {
  auto it = std::find(actions.begin(), actions.end(), name);
  return it == actions.end() ? -1 : static_cast<int>(it - actions.begin());
}

const Transition* Process::find(int state, int action) const {
  for (int ti : out[state]) {
    if (transitions[ti].action == action) return &transitions[ti];
  }
  return nullptr;
}

int Lss::lock_index(std::string_view name) const {
  auto it = std::find(locks.begin(), locks.end(), name);
  return it == locks.end() ? -1 : static_cast<int>(it - locks.begin());
}

int Lss::process_index(std::string_view id) const {
  for (std::size_t i = 0; i < processes.size(); ++i) {
    if (processes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

bool Lss::is_two_lock() const {
  return std::all_of(processes.begin(), processes.end(),
                     [](const Process& p) { return p.locks.size() <= 2; });
}

// ---------------------------------------------------------------------------

int LssBuilder::add_lock(const std::string& name) {
  if (std::find(locks_.begin(), locks_.end(), name) != locks_.end()) {
    throw Error(Errc::invalid_argument, "duplicate lock '" + name + "'");
  }
  locks_.push_back(name);
  return static_cast<int>(locks_.size()) - 1;
}

int LssBuilder::add_process(const std::string& id) {
  for (const auto& p : procs_) {
    if (p.id == id) throw Error(Errc::invalid_argument, "duplicate process '" + id + "'");
  }
  procs_.push_back(PendingProcess{id, {}, {}, std::nullopt, {}});
  return static_cast<int>(procs_.size()) - 1;
}

int LssBuilder::add_state(int proc, const std::string& name) {
  auto& p = procs_.at(proc);
  if (std::find(p.states.begin(), p.states.end(), name) != p.states.end()) {
    throw Error(Errc::duplicate_state, "process '" + p.id + "' state '" + name + "'");
  }
  p.states.push_back(name);
  if (p.init.empty()) p.init = name;
  return static_cast<int>(p.states.size()) - 1;
}

void LssBuilder::set_init(int proc, const std::string& state) { procs_.at(proc).init = state; }

void LssBuilder::declare_locks(int proc, const std::vector<std::string>& locks) {
  procs_.at(proc).declared_locks = locks;
}

void LssBuilder::add_transition(int proc, const std::string& src, const std::string& action,
                                Op op, const std::string& dst, bool controllable) {
  procs_.at(proc).transitions.push_back(PendingTransition{src, action, dst, op, controllable});
}

Lss LssBuilder::build() const {
  if (locks_.size() > static_cast<std::size_t>(kMaxLocks)) {
    throw Error(Errc::too_large, "at most 64 locks are supported");
  }
  Lss lss;
  lss.locks = locks_;
  for (const auto& pp : procs_) {
    Process p;
    p.id = pp.id;
    p.states = pp.states;
    if (p.states.empty()) throw Error(Errc::unknown_state, "process '" + p.id + "' has no states");
    p.init = p.state_index(pp.init);
    if (p.init < 0) throw Error(Errc::unknown_state, "process '" + p.id + "' init '" + pp.init + "'");

    std::optional<LockSet> declared;
    if (pp.declared_locks) {
      LockSet d;
      for (const auto& name : *pp.declared_locks) {
        int t = lss.lock_index(name);
        if (t < 0) throw Error(Errc::unknown_lock, "process '" + p.id + "' declares '" + name + "'");
        d.insert(t);
      }
      declared = d;
    }

    p.out.assign(p.states.size(), {});
    for (const auto& pt : pp.transitions) {
      Transition t;
      t.src = p.state_index(pt.src);
      t.dst = p.state_index(pt.dst);
      if (t.src < 0) throw Error(Errc::unknown_state, "process '" + p.id + "' state '" + pt.src + "'");
      if (t.dst < 0) throw Error(Errc::unknown_state, "process '" + p.id + "' state '" + pt.dst + "'");
      t.op = pt.op;
      if (t.op.kind == OpKind::nop) {
        t.op.lock = -1;
      } else {
        if (t.op.lock < 0 || t.op.lock >= static_cast<int>(lss.locks.size())) {
          throw Error(Errc::unknown_lock, "process '" + p.id + "' action '" + pt.action + "'");
        }
        if (declared && !declared->contains(t.op.lock)) {
          throw Error(Errc::unknown_lock, "process '" + p.id + "' uses '" + lss.locks[t.op.lock] +
                                              "' outside its lock set");
        }
        p.locks.insert(t.op.lock);
      }
      int a = p.action_index(pt.action);
      if (a < 0) {
        if (p.actions.size() >= static_cast<std::size_t>(kMaxActions)) {
          throw Error(Errc::too_large, "process '" + p.id + "' has more than 64 actions");
        }
        p.actions.push_back(pt.action);
        p.controllable.push_back(pt.controllable);
        a = static_cast<int>(p.actions.size()) - 1;
      } else if (p.controllable[a] != pt.controllable) {
        throw Error(Errc::action_in_both_partitions, "process '" + p.id + "' action '" + pt.action + "'");
      }
      t.action = a;
      for (int other : p.out[t.src]) {
        if (p.transitions[other].action == a) {
          throw Error(Errc::nondeterministic_delta,
                      "process '" + p.id + "' state '" + pt.src + "' action '" + pt.action + "'");
        }
      }
      p.out[t.src].push_back(static_cast<int>(p.transitions.size()));
      p.transitions.push_back(t);
    }
    if (declared) p.locks = *declared;
    lss.processes.push_back(std::move(p));
  }
  return lss;
}

// ---------------------------------------------------------------------------

Move advance(LocalState& s, const Transition& t, Annotation mode) {
  const Op& op = t.op;
  switch (op.kind) {
    case OpKind::nop:
      break;
    case OpKind::get:
      if (s.owned.contains(op.lock)) return Move::discipline;
      s.owned.insert(op.lock);
      if (mode == Annotation::two_lock) {
        s.release_bit = false;
      } else if (mode == Annotation::nested) {
        for (auto& tc : s.touched) tc.insert(op.lock);
        s.stack.push_back(op.lock);
        s.touched.emplace_back();
      }
      break;
    case OpKind::rel:
      if (!s.owned.contains(op.lock)) return Move::discipline;
      if (mode == Annotation::nested) {
        if (s.stack.empty() || s.stack.back() != op.lock) return Move::not_nested;
        s.stack.pop_back();
        s.touched.pop_back();
        for (auto& tc : s.touched) tc.insert(op.lock);
      }
      s.owned.erase(op.lock);
      if (mode == Annotation::two_lock) s.release_bit = s.owned.size() == 1;
      break;
  }
  s.base = t.dst;
  return Move::ok;
}

LocalState initial_local_state(const Process& p, Annotation mode, LockSet owned) {
  LocalState s;
  s.base = p.init;
  s.owned = owned;
  if (mode == Annotation::nested) {
    for (int t : owned) {
      s.stack.push_back(t);
      s.touched.emplace_back();
    }
  }
  return s;
}

int AnnotatedProcess::find(const LocalState& s) const {
  auto it = index.find(s);
  return it == index.end() ? -1 : it->second;
}

std::vector<int> AnnotatedProcess::run_to(int node) const {
  std::vector<int> run;
  for (int n = node; parent[n] >= 0; n = parent[n]) run.push_back(parent_edge[n]);
  std::reverse(run.begin(), run.end());
  return run;
}

bool LocalStrategy::allows(const Process& p, const LocalState& s, int action) const {
  if (!p.controllable[action]) return true;
  return (allowed_controllable(p, s) >> action) & 1U;
}

ActionSet LocalStrategy::allowed_controllable(const Process& p, const LocalState& s) const {
  if (auto it = exact.find(s); it != exact.end()) return it->second;
  if (auto it = by_state.find(s.base); it != by_state.end()) return it->second;
  ActionSet all = 0;
  for (std::size_t a = 0; a < p.actions.size(); ++a) {
    if (p.controllable[a]) all |= ActionSet{1} << a;
  }
  return all;
}

AnnotatedProcess annotate(const Process& p, Annotation mode, LockSet initial_owned,
                          const LocalStrategy* strategy) {
  AnnotatedProcess ap;
  ap.mode = mode;
  LocalState init = initial_local_state(p, mode, initial_owned);
  ap.index.emplace(init, 0);
  ap.nodes.push_back(init);
  ap.out.emplace_back();
  ap.parent.push_back(-1);
  ap.parent_edge.push_back(-1);
  for (std::size_t n = 0; n < ap.nodes.size(); ++n) {
    for (int ti : p.out[ap.nodes[n].base]) {
      const Transition& t = p.transitions[ti];
      if (strategy && !strategy->allows(p, ap.nodes[n], t.action)) continue;
      LocalState next = ap.nodes[n];
      Move m = advance(next, t, mode);
      if (m == Move::discipline) continue;
      if (m == Move::not_nested) {
        std::string run;
        for (int e : ap.run_to(static_cast<int>(n))) run += p.actions[p.transitions[e].action] + " ";
        run += p.actions[t.action];
        throw Error(Errc::not_nested, "process '" + p.id + "' releases a non-top lock after: " + run);
      }
      auto [it, fresh] = ap.index.emplace(next, static_cast<int>(ap.nodes.size()));
      if (fresh) {
        ap.nodes.push_back(next);
        ap.out.emplace_back();
        ap.parent.push_back(static_cast<int>(n));
        ap.parent_edge.push_back(ti);
      }
      ap.out[n].push_back(AnnotatedEdge{ti, it->second});
    }
  }
  return ap;
}

// ---------------------------------------------------------------------------

LockSet GlobalConfig::taken() const {
  LockSet all;
  for (const auto& s : local) all |= s.owned;
  return all;
}

GlobalConfig initial_config(const Lss& lss, Annotation mode, std::span<const LockSet> ownership) {
  GlobalConfig cfg;
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    LockSet own = i < ownership.size() ? ownership[i] : LockSet{};
    cfg.local.push_back(initial_local_state(lss.processes[i], mode, own));
  }
  return cfg;
}

GlobalConfig step(const Lss& lss, const GlobalConfig& cfg, int proc, int action, Annotation mode) {
  const Process& p = lss.processes.at(proc);
  const Transition* t = p.find(cfg.local[proc].base, action);
  if (!t) {
    throw Error(Errc::blocked, "process '" + p.id + "' has no '" + p.actions.at(action) + "' here");
  }
  if (t->op.is_get()) {
    for (std::size_t q = 0; q < cfg.local.size(); ++q) {
      if (static_cast<int>(q) != proc && cfg.local[q].owned.contains(t->op.lock)) {
        throw Error(Errc::blocked, "lock '" + lss.locks[t->op.lock] + "' is taken");
      }
    }
  }
  GlobalConfig next = cfg;
  Move m = advance(next.local[proc], *t, mode);
  if (m == Move::discipline) {
    throw Error(Errc::blocked, "process '" + p.id + "' violates lock ownership with '" +
                                   p.actions[action] + "'");
  }
  if (m == Move::not_nested) {
    throw Error(Errc::not_nested, "process '" + p.id + "' releases a non-top lock");
  }
  return next;
}

std::vector<StepRef> enabled(const Lss& lss, const GlobalConfig& cfg, const Strategy& strategy) {
  std::vector<StepRef> result;
  LockSet taken = cfg.taken();
  for (std::size_t i = 0; i < lss.processes.size(); ++i) {
    const Process& p = lss.processes[i];
    const LocalState& s = cfg.local[i];
    for (int ti : p.out[s.base]) {
      const Transition& t = p.transitions[ti];
      if (i < strategy.local.size() && !strategy.local[i].allows(p, s, t.action)) continue;
      if (t.op.is_get() && taken.contains(t.op.lock)) continue;
      if (t.op.is_rel() && !s.owned.contains(t.op.lock)) continue;
      result.push_back(StepRef{static_cast<int>(i), t.action});
    }
  }
  return result;
}

std::vector<Op> project(const Run& run, int proc) {
  std::vector<Op> ops;
  for (const auto& s : run) {
    if (s.proc == proc) ops.push_back(s.op);
  }
  return ops;
}

bool is_neutral(std::span<const Op> local_run) {
  std::map<int, int> balance;
  for (const Op& op : local_run) {
    if (op.is_get()) ++balance[op.lock];
    if (op.is_rel()) --balance[op.lock];
  }
  return std::all_of(balance.begin(), balance.end(), [](const auto& kv) { return kv.second == 0; });
}

GlobalConfig replay(const Lss& lss, const Run& run, Annotation mode,
                    std::span<const LockSet> ownership) {
  GlobalConfig cfg = initial_config(lss, mode, ownership);
  for (const auto& s : run) cfg = step(lss, cfg, s.proc, s.action, mode);
  return cfg;
}

std::string describe(const Lss& lss, const RunStep& s) {
  const Process& p = lss.processes.at(s.proc);
  std::string text = p.id + ":" + p.actions.at(s.action);
  if (s.op.is_get()) text += "(get " + lss.locks[s.op.lock] + ")";
  if (s.op.is_rel()) text += "(rel " + lss.locks[s.op.lock] + ")";
  return text;
}

}  // namespace lockctl

#include "lockctl/initown.hpp"

#include <algorithm>
#include <set>

namespace lockctl {

namespace {

std::string fresh_name(std::string base, const std::set<std::string>& taken) {
  while (taken.count(base)) base += "'";
  return base;
}

}  // namespace

void validate_ownership(const Lss& lss, std::span<const LockSet> own) {
  if (own.size() > lss.processes.size()) {
    throw Error(Errc::invalid_ownership, "ownership lists more processes than the system has");
  }
  LockSet seen;
  for (std::size_t i = 0; i < own.size(); ++i) {
    const Process& p = lss.processes[i];
    if (!own[i].subset_of(p.locks)) {
      int t = (own[i] - p.locks).first();
      throw Error(Errc::invalid_ownership, "process '" + p.id + "' cannot own '" + lss.locks.at(t) + "'");
    }
    if (own[i].intersects(seen)) {
      int t = (own[i] & seen).first();
      throw Error(Errc::invalid_ownership, "lock '" + lss.locks.at(t) + "' is owned twice");
    }
    seen |= own[i];
  }
}

InitOwnership ownership_from_json(const Lss& lss, const json& doc) {
  if (!doc.is_object()) throw Error(Errc::parse, "ownership document must be an object");
  InitOwnership own(lss.processes.size());
  for (const auto& [id, locks] : doc.items()) {
    int p = lss.process_index(id);
    if (p < 0) throw Error(Errc::invalid_ownership, "unknown process '" + id + "'");
    if (!locks.is_array()) throw Error(Errc::parse, "ownership of '" + id + "' must be a list");
    for (const auto& l : locks) {
      if (!l.is_string()) throw Error(Errc::parse, "lock names must be strings");
      int t = lss.lock_index(l.get<std::string>());
      if (t < 0) throw Error(Errc::invalid_ownership, "unknown lock '" + l.get<std::string>() + "'");
      if (own[p].contains(t)) throw Error(Errc::invalid_ownership, "lock '" + lss.locks[t] + "' listed twice");
      own[p].insert(t);
    }
  }
  validate_ownership(lss, own);
  return own;
}

json ownership_to_json(const Lss& lss, std::span<const LockSet> own) {
  json doc = json::object();
  for (std::size_t i = 0; i < own.size(); ++i) {
    json arr = json::array();
    for (int t : own[i]) arr.push_back(lss.locks.at(t));
    doc[lss.processes.at(i).id] = arr;
  }
  return doc;
}

Lss transform_init(const Lss& lss, std::span<const LockSet> own) {
  validate_ownership(lss, own);
  const std::size_t n = lss.processes.size();
  LssBuilder b;
  std::set<std::string> lock_names(lss.locks.begin(), lss.locks.end());
  for (const auto& l : lss.locks) b.add_lock(l);
  std::vector<int> key(n);
  std::vector<std::string> key_name(n);
  for (std::size_t i = 0; i < n; ++i) {
    key_name[i] = fresh_name("k_" + lss.processes[i].id, lock_names);
    lock_names.insert(key_name[i]);
    key[i] = b.add_lock(key_name[i]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Process& p = lss.processes[i];
    int proc = b.add_process(p.id);
    std::set<std::string> states(p.states.begin(), p.states.end());
    std::set<std::string> actions(p.actions.begin(), p.actions.end());

    struct Step {
      Op op;
      std::string action;
    };
    std::vector<Step> prologue;
    LockSet mine = i < own.size() ? own[i] : LockSet{};
    for (int t : mine) prologue.push_back({Op::get(t), "init_get_" + lss.locks[t]});
    for (std::size_t q = 0; q < n; ++q) {
      if (q == i) continue;
      prologue.push_back({Op::get(key[q]), "init_get_" + key_name[q]});
      prologue.push_back({Op::rel(key[q]), "init_rel_" + key_name[q]});
    }
    prologue.push_back({Op::get(key[i]), "init_get_" + key_name[i]});

    std::vector<std::string> names;
    for (std::size_t k = 0; k < prologue.size(); ++k) {
      names.push_back(fresh_name("init_" + std::to_string(k), states));
      states.insert(names.back());
    }
    const std::string idle = fresh_name("init_idle", actions);
    actions.insert(idle);
    for (auto& s : prologue) {
      s.action = fresh_name(s.action, actions);
      actions.insert(s.action);
    }

    for (const auto& s : names) b.add_state(proc, s);
    for (const auto& s : p.states) b.add_state(proc, s);
    b.set_init(proc, names.front());

    std::vector<std::string> decl;
    for (int t : p.locks) decl.push_back(lss.locks[t]);
    decl.insert(decl.end(), key_name.begin(), key_name.end());
    b.declare_locks(proc, decl);

    for (std::size_t k = 0; k < prologue.size(); ++k) {
      const std::string& dst = k + 1 < prologue.size() ? names[k + 1] : p.states[p.init];
      b.add_transition(proc, names[k], prologue[k].action, prologue[k].op, dst, false);
      b.add_transition(proc, names[k], idle, Op::nop(), names[k], false);
    }
    for (const auto& t : p.transitions) {
      b.add_transition(proc, p.states[t.src], p.actions[t.action], t.op, p.states[t.dst], p.controllable[t.action]);
    }
  }
  return b.build();
}

}  // namespace lockctl

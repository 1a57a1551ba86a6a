#include "lockctl/io.hpp"

namespace lockctl {

namespace {

std::string str_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
    throw Error(Errc::parse, where + ": missing string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

const json& arr_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_array()) {
    throw Error(Errc::parse, where + ": missing array field '" + key + "'");
  }
  return obj[key];
}

Op op_from_json(const Lss& lss, const json& doc, const std::string& where) {
  std::string kind = str_field(doc, "kind", where);
  if (kind == "nop") return Op::nop();
  if (kind != "get" && kind != "rel") throw Error(Errc::parse, where + ": bad op kind '" + kind + "'");
  std::string lock = str_field(doc, "lock", where);
  int t = lss.lock_index(lock);
  if (t < 0) throw Error(Errc::unknown_lock, where + ": '" + lock + "'");
  return kind == "get" ? Op::get(t) : Op::rel(t);
}

LockSet lockset_from_json(const Lss& lss, const json& arr, const std::string& where, Errc err) {
  if (!arr.is_array()) throw Error(Errc::parse, where + ": expected a list of locks");
  LockSet s;
  for (const auto& v : arr) {
    if (!v.is_string()) throw Error(Errc::parse, where + ": expected a lock name");
    int t = lss.lock_index(v.get<std::string>());
    if (t < 0) throw Error(err, where + ": unknown lock '" + v.get<std::string>() + "'");
    s.insert(t);
  }
  return s;
}

json lockset_to_json(const Lss& lss, LockSet s) {
  json arr = json::array();
  for (int t : s) arr.push_back(lss.locks[t]);
  return arr;
}

}  // namespace

const char* annotation_name(Annotation mode) {
  switch (mode) {
    case Annotation::owned: return "owned";
    case Annotation::two_lock: return "two_lock";
    case Annotation::nested: return "nested";
  }
  return "owned";
}

Lss lss_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::parse, "document must be an object");
  LssBuilder b;
  for (const auto& l : arr_field(doc, "locks", "document")) {
    if (!l.is_string()) throw Error(Errc::parse, "lock names must be strings");
    b.add_lock(l.get<std::string>());
  }
  // Lock lookups during op parsing need the lock table; build a shell first.
  Lss shell;
  for (const auto& l : doc["locks"]) shell.locks.push_back(l.get<std::string>());

  for (const auto& pd : arr_field(doc, "processes", "document")) {
    std::string id = str_field(pd, "id", "process");
    int p = b.add_process(id);
    std::string where = "process '" + id + "'";
    for (const auto& s : arr_field(pd, "states", where)) {
      if (!s.is_string()) throw Error(Errc::parse, where + ": state names must be strings");
      b.add_state(p, s.get<std::string>());
    }
    if (pd.contains("init")) b.set_init(p, str_field(pd, "init", where));
    if (pd.contains("locks")) {
      std::vector<std::string> declared;
      for (const auto& l : pd["locks"]) {
        if (!l.is_string()) throw Error(Errc::parse, where + ": lock names must be strings");
        declared.push_back(l.get<std::string>());
      }
      b.declare_locks(p, declared);
    }
    if (!pd.contains("transitions")) continue;
    for (const auto& td : arr_field(pd, "transitions", where)) {
      std::string src = str_field(td, "src", where);
      std::string dst = str_field(td, "dst", where);
      std::string action = str_field(td, "action", where);
      Op op = td.contains("op") ? op_from_json(shell, td["op"], where + " action '" + action + "'")
                                : Op::nop();
      bool ctrl = td.contains("controllable") && td["controllable"].is_boolean() &&
                  td["controllable"].get<bool>();
      b.add_transition(p, src, action, op, dst, ctrl);
    }
  }
  return b.build();
}

Lss parse_lss(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, e.what());
  }
  return lss_from_json(doc);
}

json op_to_json(const Lss& lss, const Op& op) {
  switch (op.kind) {
    case OpKind::nop: return json{{"kind", "nop"}};
    case OpKind::get: return json{{"kind", "get"}, {"lock", lss.locks.at(op.lock)}};
    case OpKind::rel: return json{{"kind", "rel"}, {"lock", lss.locks.at(op.lock)}};
  }
  return json{{"kind", "nop"}};
}

json to_json(const Lss& lss) {
  json doc;
  doc["locks"] = lss.locks;
  doc["processes"] = json::array();
  for (const auto& p : lss.processes) {
    json pd;
    pd["id"] = p.id;
    pd["states"] = p.states;
    pd["init"] = p.states[p.init];
    LockSet used;
    for (const auto& t : p.transitions) {
      if (t.op.kind != OpKind::nop) used.insert(t.op.lock);
    }
    if (used != p.locks) {
      pd["locks"] = json::array();
      for (int t : p.locks) pd["locks"].push_back(lss.locks[t]);
    }
    pd["transitions"] = json::array();
    for (const auto& t : p.transitions) {
      pd["transitions"].push_back(json{{"src", p.states[t.src]},
                                       {"action", p.actions[t.action]},
                                       {"op", op_to_json(lss, t.op)},
                                       {"dst", p.states[t.dst]},
                                       {"controllable", static_cast<bool>(p.controllable[t.action])}});
    }
    doc["processes"].push_back(pd);
  }
  return doc;
}

std::string serialize_lss(const Lss& lss) { return to_json(lss).dump(2); }

// ---------------------------------------------------------------------------

Strategy strategy_from_json(const Lss& lss, const json& doc) {
  if (!doc.is_object()) throw Error(Errc::parse, "strategy document must be an object");
  const json* body = &doc;
  Strategy st;
  std::optional<Annotation> mode;
  if (doc.contains("strategy") && doc["strategy"].is_object()) {
    body = &doc["strategy"];
    if (doc.contains("locally_live")) st.locally_live = doc["locally_live"].get<bool>();
    if (doc.contains("mode")) {
      std::string m = doc["mode"].get<std::string>();
      if (m == "owned") mode = Annotation::owned;
      else if (m == "two_lock") mode = Annotation::two_lock;
      else if (m == "nested") mode = Annotation::nested;
      else throw Error(Errc::parse, "unknown strategy mode '" + m + "'");
    }
  }
  if (!mode) {
    mode = Annotation::owned;
    for (const auto& [pid, entries] : body->items()) {
      if (!entries.is_array()) continue;
      for (const auto& e : entries) {
        if (e.contains("stack") || e.contains("touched")) mode = Annotation::nested;
        else if (e.contains("release_bit") && *mode == Annotation::owned) mode = Annotation::two_lock;
      }
    }
  }
  st.mode = *mode;
  st.local.assign(lss.processes.size(), {});

  for (const auto& [pid, entries] : body->items()) {
    int pi = lss.process_index(pid);
    if (pi < 0) throw Error(Errc::strategy_mismatch, "unknown process '" + pid + "'");
    const Process& p = lss.processes[pi];
    if (!entries.is_array()) throw Error(Errc::parse, "entries of '" + pid + "' must be a list");
    for (const auto& e : entries) {
      std::string where = "strategy of '" + pid + "'";
      std::string sname = str_field(e, "state", where);
      int base = p.state_index(sname);
      if (base < 0) throw Error(Errc::strategy_mismatch, where + ": unknown state '" + sname + "'");
      ActionSet allow = 0;
      for (const auto& a : arr_field(e, "allow", where)) {
        int ai = p.action_index(a.get<std::string>());
        if (ai < 0) {
          throw Error(Errc::strategy_mismatch, where + ": unknown action '" + a.get<std::string>() + "'");
        }
        if (p.controllable[ai]) allow |= ActionSet{1} << ai;
      }
      bool annotated = e.contains("owned") || e.contains("stack");
      if (!annotated) {
        st.local[pi].by_state[base] = allow;
        continue;
      }
      LocalState s;
      s.base = base;
      if (e.contains("owned")) s.owned = lockset_from_json(lss, e["owned"], where, Errc::strategy_mismatch);
      if (st.mode == Annotation::two_lock && e.contains("release_bit")) {
        s.release_bit = e["release_bit"].get<bool>();
        if (s.release_bit && s.owned.size() != 1) {
          throw Error(Errc::strategy_mismatch, where + ": release_bit needs exactly one owned lock");
        }
      }
      if (st.mode == Annotation::nested) {
        LockSet from_stack;
        if (e.contains("stack")) {
          for (const auto& l : e["stack"]) {
            int t = lss.lock_index(l.get<std::string>());
            if (t < 0) throw Error(Errc::strategy_mismatch, where + ": unknown lock in stack");
            s.stack.push_back(t);
            from_stack.insert(t);
          }
        }
        if (!e.contains("owned")) s.owned = from_stack;
        if (s.owned != from_stack) {
          throw Error(Errc::strategy_mismatch, where + ": stack disagrees with owned");
        }
        s.touched.assign(s.stack.size(), LockSet{});
        if (e.contains("touched")) {
          const json& tl = e["touched"];
          if (!tl.is_array() || tl.size() != s.stack.size()) {
            throw Error(Errc::strategy_mismatch, where + ": touched must align with stack");
          }
          for (std::size_t i = 0; i < s.stack.size(); ++i) {
            s.touched[i] = lockset_from_json(lss, tl[i], where, Errc::strategy_mismatch);
          }
        }
      }
      st.local[pi].exact[s] = allow;
    }
  }
  return st;
}

json to_json(const Lss& lss, const Strategy& strategy) {
  json body = json::object();
  for (std::size_t pi = 0; pi < lss.processes.size() && pi < strategy.local.size(); ++pi) {
    const Process& p = lss.processes[pi];
    json entries = json::array();
    auto allow_list = [&](ActionSet set) {
      json arr = json::array();
      for (std::size_t a = 0; a < p.actions.size(); ++a) {
        if ((set >> a) & 1U) arr.push_back(p.actions[a]);
      }
      return arr;
    };
    for (const auto& [base, set] : strategy.local[pi].by_state) {
      entries.push_back(json{{"state", p.states[base]}, {"allow", allow_list(set)}});
    }
    for (const auto& [s, set] : strategy.local[pi].exact) {
      json e;
      e["state"] = p.states[s.base];
      e["owned"] = lockset_to_json(lss, s.owned);
      if (strategy.mode == Annotation::two_lock) e["release_bit"] = s.release_bit;
      if (strategy.mode == Annotation::nested) {
        json stack = json::array();
        json touched = json::array();
        for (std::size_t i = 0; i < s.stack.size(); ++i) {
          stack.push_back(lss.locks[s.stack[i]]);
          touched.push_back(lockset_to_json(lss, s.touched[i]));
        }
        e["stack"] = stack;
        e["touched"] = touched;
      }
      e["allow"] = allow_list(set);
      entries.push_back(e);
    }
    body[p.id] = entries;
  }
  return json{{"mode", annotation_name(strategy.mode)},
              {"locally_live", strategy.locally_live},
              {"strategy", body}};
}

Run trace_from_json(const Lss& lss, const json& doc) {
  if (!doc.is_array()) throw Error(Errc::parse, "trace must be a list");
  Run run;
  for (const auto& e : doc) {
    std::string pid = str_field(e, "proc", "trace step");
    int pi = lss.process_index(pid);
    if (pi < 0) throw Error(Errc::parse, "trace: unknown process '" + pid + "'");
    const Process& p = lss.processes[pi];
    int a = p.action_index(str_field(e, "action", "trace step"));
    if (a < 0) throw Error(Errc::parse, "trace: unknown action");
    Op op = e.contains("op") ? op_from_json(lss, e["op"], "trace step") : Op::nop();
    run.push_back(RunStep{pi, a, op});
  }
  return run;
}

json trace_to_json(const Lss& lss, const Run& run) {
  json arr = json::array();
  for (const auto& s : run) {
    const Process& p = lss.processes.at(s.proc);
    arr.push_back(json{{"proc", p.id}, {"action", p.actions.at(s.action)}, {"op", op_to_json(lss, s.op)}});
  }
  return arr;
}

}  // namespace lockctl

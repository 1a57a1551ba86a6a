#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lockctl/exclusive.hpp"
#include "lockctl/generators.hpp"
#include "lockctl/initown.hpp"
#include "lockctl/nested.hpp"
#include "lockctl/oracle.hpp"

using namespace lockctl;

namespace {

constexpr int kWinning = 0;
constexpr int kLosing = 1;
constexpr int kError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path + ": " + e.what());
  }
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(Errc::invalid_argument, "cannot write '" + out + "'");
  f << text << '\n';
}

struct Classification {
  bool two_lock = false;
  bool exclusive = false;
  bool nested = false;
  bool locally_live = false;  // every process has a locally-live local strategy

  json to_json() const {
    return {{"2lss", two_lock}, {"exclusive", exclusive}, {"nested", nested}, {"locally_live_compatible", locally_live}};
  }
};

Classification classify(const Lss& lss) {
  Classification c;
  c.two_lock = lss.is_two_lock();
  c.exclusive = is_exclusive(lss).exclusive;
  c.nested = check_nested(lss).nested;
  c.locally_live = true;
  for (const auto& p : lss.processes) c.locally_live = c.locally_live && locally_live_strategy(p).has_value();
  return c;
}

struct CheckSettings {
  std::string mode = "auto";
  bool json_out = false;
  std::size_t limit_states = Limits{}.max_states;
  std::size_t limit_strategies = Limits{}.max_candidates;
};

// Procedure used by auto mode; the problem asked is locally-live control whenever every
// process can be kept locally live, otherwise unrestricted control.
std::string pick_mode(const Classification& c) {
  if (c.locally_live) {
    if (c.two_lock && c.exclusive) return "exclusive";
    if (c.nested) return "nested";
    if (c.two_lock) return "locally-live";
    return "oracle";
  }
  if (c.nested) return "nested";
  if (c.two_lock) return "general";
  return "oracle";
}

void print_text(const Lss& lss, const json& result) {
  std::cout << "verdict: " << result["verdict"].get<std::string>() << '\n';
  std::cout << "mode: " << result["mode"].get<std::string>() << '\n';
  std::cout << "problem: " << result["problem"].get<std::string>() << '\n';
  std::cout << "time_ms: " << result["time_ms"].get<double>() << '\n';
  if (result.contains("trace")) {
    std::cout << "deadlock trace:\n";
    for (const auto& step : trace_from_json(lss, result["trace"])) std::cout << "  " << describe(lss, step) << '\n';
  }
  for (const char* key : {"strategy", "selection", "scheme", "scheme_trace", "analysis"}) {
    if (result.contains(key)) std::cout << key << ":\n" << result[key].dump(2) << '\n';
  }
}

int cmd_check(const std::string& file, const CheckSettings& s) {
  Lss lss = parse_lss(read_file(file));
  auto start = std::chrono::steady_clock::now();
  Classification cls = classify(lss);
  std::string mode = s.mode == "auto" ? pick_mode(cls) : s.mode;
  const bool live = mode == "exclusive" || mode == "locally-live" ||
                    ((mode == "nested" || mode == "oracle") && cls.locally_live);
  Limits limits;
  limits.max_states = s.limit_states;
  limits.max_candidates = s.limit_strategies;

  json result{{"mode", mode}, {"problem", live ? "locally-live" : "general"}, {"classification", cls.to_json()}};
  bool winning = false;
  if (mode == "exclusive") {
    ExclusiveDecision d = decide_exclusive(lss);
    winning = d.winning;
    if (winning) result["strategy"] = to_json(lss, *d.strategy);
    result["analysis"] = to_json(d.unavoidable.graph, d.analysis);
  } else if (mode == "nested") {
    NestedDecision d = decide_nested(lss, live, limits.max_combinations);
    winning = d.winning;
    if (winning) result["strategy"] = to_json(lss, *d.strategy);
    else if (d.selection) result["selection"] = to_json(lss, *d.selection);
  } else if (mode == "locally-live") {
    LocallyLiveDecision d = decide_locally_live(lss, limits.max_combinations);
    winning = d.winning;
    if (winning) result["strategy"] = to_json(lss, *d.strategy);
    if (!winning && d.scheme && d.graph) {
      result["scheme"] = to_json(*d.graph, *d.scheme);
      result["scheme_trace"] = decide_sufficient_scheme(*d.graph).state.trace;
    }
  } else if (mode == "general") {
    Decision2 d = decide_general_2lss(lss, limits.max_combinations);
    winning = d.winning;
    if (winning) result["strategy"] = to_json(lss, *d.strategy);
    else if (d.selection) result["selection"] = to_json(lss, *d.selection);
  } else if (mode == "oracle") {
    OracleOptions opts;
    opts.locally_live = live;
    opts.limits = limits;
    OracleVerdict v = exists_winning_oracle(lss, opts);
    winning = v.winning;
    if (winning) result["strategy"] = to_json(lss, *v.strategy);
    else if (v.trace) result["trace"] = trace_to_json(lss, *v.trace);
  } else {
    throw Error(Errc::invalid_argument, "unknown mode '" + mode + "'");
  }
  result["verdict"] = winning ? "winning" : "losing";
  result["time_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (s.json_out) std::cout << result.dump(2) << '\n';
  else print_text(lss, result);
  return winning ? kWinning : kLosing;
}

int cmd_verify(const std::string& file, const std::string& strategy_file, bool json_out, std::size_t limit_states) {
  Lss lss = parse_lss(read_file(file));
  Strategy strategy = strategy_from_json(lss, read_json(strategy_file));
  auto start = std::chrono::steady_clock::now();
  Limits limits;
  limits.max_states = limit_states;
  OracleVerdict v = verify_strategy(lss, strategy, limits);
  json result{{"verdict", v.winning ? "winning" : "losing"},
              {"mode", "oracle"},
              {"problem", strategy.locally_live ? "locally-live" : "general"},
              {"states", v.states}};
  if (v.trace) result["trace"] = trace_to_json(lss, *v.trace);
  result["time_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (json_out) std::cout << result.dump(2) << '\n';
  else print_text(lss, result);
  return v.winning ? kWinning : kLosing;
}

int to_int(const std::string& s) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_argument, "expected an integer, got '" + s + "'");
}

int cmd_generate(const std::string& kind, const std::vector<std::string>& params, std::uint64_t seed,
                 const std::string& out) {
  auto param = [&](std::size_t i, int fallback) { return i < params.size() ? to_int(params[i]) : fallback; };
  Lss lss;
  if (kind == "philosophers") lss = gen_philosophers(param(0, 2));
  else if (kind == "flexible") lss = gen_flexible_philosophers(param(0, 2));
  else if (kind == "left-forced") lss = gen_left_forced_philosophers(param(0, 2));
  else if (kind == "qbf") {
    if (params.empty()) throw Error(Errc::invalid_argument, "qbf needs a formula file");
    lss = gen_qbf_gadget(qbf_from_json(read_json(params[0])));
  } else if (kind == "random-qbf") {
    write_output(to_json(gen_random_qbf(seed, param(0, 1), param(1, 1), param(2, 2))).dump(2), out);
    return 0;
  } else if (kind == "random" || kind == "random-exclusive" || kind == "random-nested") {
    RandomParams rp;
    rp.procs = param(0, rp.procs);
    rp.states = param(1, rp.states);
    rp.locks = param(2, rp.locks);
    rp.exclusive = kind == "random-exclusive";
    rp.nested = kind == "random-nested";
    lss = gen_random_lss(seed, rp);
  } else {
    throw Error(Errc::invalid_argument, "unknown generator '" + kind + "'");
  }
  write_output(serialize_lss(lss), out);
  return 0;
}

int cmd_transform_init(const std::string& file, const std::string& ownership_file, const std::string& out) {
  Lss lss = parse_lss(read_file(file));
  InitOwnership own = ownership_from_json(lss, read_json(ownership_file));
  write_output(serialize_lss(transform_init(lss, own)), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadlock-avoidance control for lock-sharing systems"};
  app.require_subcommand(1);

  CheckSettings check;
  std::string file, strategy_file, ownership_file, kind, out;
  std::vector<std::string> params;
  std::uint64_t seed = 1;

  auto* c = app.add_subcommand("check", "Decide whether a winning strategy exists");
  c->add_option("file", file, "System document")->required();
  c->add_option("--mode", check.mode, "Decision procedure")
      ->check(CLI::IsMember({"auto", "general", "locally-live", "exclusive", "nested", "oracle"}));
  c->add_flag("--json", check.json_out, "Machine-readable output");
  c->add_option("--limit-states", check.limit_states, "Product state cap for the oracle");
  c->add_option("--limit-strategies", check.limit_strategies, "Candidate strategy cap per process");

  bool verify_json = false;
  std::size_t verify_states = Limits{}.max_states;
  auto* v = app.add_subcommand("verify", "Check a given strategy and print a deadlock trace if it loses");
  v->add_option("file", file, "System document")->required();
  v->add_option("strategy", strategy_file, "Strategy document")->required();
  v->add_flag("--json", verify_json, "Machine-readable output");
  v->add_option("--limit-states", verify_states, "Product state cap");

  auto* g = app.add_subcommand("generate", "Write a generated system");
  g->add_option("kind", kind, "philosophers|flexible|left-forced|qbf|random-qbf|random|random-exclusive|random-nested")
      ->required();
  g->add_option("params", params, "Generator parameters");
  g->add_option("--seed", seed, "Random seed");
  g->add_option("--out", out, "Output path");

  auto* t = app.add_subcommand("transform-init", "Remove initial lock ownership");
  t->add_option("file", file, "System document")->required();
  t->add_option("ownership", ownership_file, "Ownership document")->required();
  t->add_option("--out", out, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*c) return cmd_check(file, check);
    if (*v) return cmd_verify(file, strategy_file, verify_json, verify_states);
    if (*g) return cmd_generate(kind, params, seed, out);
    if (*t) return cmd_transform_init(file, ownership_file, out);
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kError;
}

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lockctl/errors.hpp"
#include "lockctl/lockset.hpp"

namespace lockctl {

inline constexpr int kMaxActions = 64;

enum class OpKind : std::uint8_t { nop, get, rel };

struct Op {
  OpKind kind = OpKind::nop;
  int lock = -1;

  static constexpr Op nop() { return {}; }
  static constexpr Op get(int t) { return {OpKind::get, t}; }
  static constexpr Op rel(int t) { return {OpKind::rel, t}; }
  constexpr bool is_get() const { return kind == OpKind::get; }
  constexpr bool is_rel() const { return kind == OpKind::rel; }
  constexpr auto operator<=>(const Op&) const = default;
};

struct Transition {
  int src = 0;
  int action = 0;
  Op op;
  int dst = 0;
};

// One finite automaton of the system. Action names are local to the process.
struct Process {
  std::string id;
  std::vector<std::string> states;
  int init = 0;
  std::vector<std::string> actions;
  std::vector<bool> controllable;  // indexed by action
  std::vector<Transition> transitions;
  LockSet locks;                   // T_p
  std::vector<std::vector<int>> out;  // transition indices per state

  int state_index(std::string_view name) const;
  int action_index(std::string_view name) const;
  // Transition leaving `state` with `action`, or nullptr.
  const Transition* find(int state, int action) const;
};

struct Lss {
  std::vector<std::string> locks;
  std::vector<Process> processes;

  int lock_index(std::string_view name) const;
  int process_index(std::string_view id) const;
  // Every process uses at most two locks (missing ones count as unused dummies).
  bool is_two_lock() const;
};

// Incremental construction with full validation in build().
class LssBuilder {
public:
  int add_lock(const std::string& name);
  int add_process(const std::string& id);
  int add_state(int proc, const std::string& name);
  void set_init(int proc, const std::string& state);
  // Declares T_p explicitly; without it T_p is the set of locks used.
  void declare_locks(int proc, const std::vector<std::string>& locks);
  void add_transition(int proc, const std::string& src, const std::string& action, Op op,
                      const std::string& dst, bool controllable);
  Lss build() const;

private:
  struct PendingTransition {
    std::string src, action, dst;
    Op op;
    bool controllable;
  };
  struct PendingProcess {
    std::string id;
    std::vector<std::string> states;
    std::string init;
    std::optional<std::vector<std::string>> declared_locks;
    std::vector<PendingTransition> transitions;
  };
  std::vector<std::string> locks_;
  std::vector<PendingProcess> procs_;
};

// ---------------------------------------------------------------------------
// Annotated local states

enum class Annotation { owned, two_lock, nested };

struct LocalState {
  int base = 0;
  LockSet owned;
  // two_lock: exactly one lock owned and the other was released since it was taken.
  bool release_bit = false;
  // nested: held locks in acquisition order, and per held lock the locks operated since.
  std::vector<int> stack;
  std::vector<LockSet> touched;

  auto operator<=>(const LocalState&) const = default;
};

enum class Move { ok, discipline, not_nested };

// Applies t to s. `discipline` means get of an owned lock or rel of a free one.
Move advance(LocalState& s, const Transition& t, Annotation mode);

LocalState initial_local_state(const Process& p, Annotation mode, LockSet owned = {});

struct AnnotatedEdge {
  int transition = 0;
  int dst = 0;
};

struct AnnotatedProcess {
  Annotation mode = Annotation::owned;
  std::vector<LocalState> nodes;
  std::vector<std::vector<AnnotatedEdge>> out;
  std::vector<int> parent_edge;  // transition leading to the node on a shortest path, -1 at init
  std::vector<int> parent;
  std::map<LocalState, int> index;

  int find(const LocalState& s) const;
  // Transition indices of a shortest local run reaching `node`.
  std::vector<int> run_to(int node) const;
};

using ActionSet = std::uint64_t;

// Positional local strategy. Unlisted annotated states allow every action.
struct LocalStrategy {
  std::map<LocalState, ActionSet> exact;
  std::map<int, ActionSet> by_state;  // entries that omit the annotation

  bool allows(const Process& p, const LocalState& s, int action) const;
  ActionSet allowed_controllable(const Process& p, const LocalState& s) const;
};

struct Strategy {
  Annotation mode = Annotation::owned;
  bool locally_live = false;
  std::vector<LocalStrategy> local;
};

// Builds the reachable part of the annotated automaton. Transitions that break the
// lock discipline are dropped. With a strategy only allowed transitions are followed.
// Nested mode throws NotNested on a reachable release of a non-top lock.
AnnotatedProcess annotate(const Process& p, Annotation mode, LockSet initial_owned = {},
                          const LocalStrategy* strategy = nullptr);

// ---------------------------------------------------------------------------
// Global semantics

struct GlobalConfig {
  std::vector<LocalState> local;
  LockSet taken() const;
  auto operator<=>(const GlobalConfig&) const = default;
};

GlobalConfig initial_config(const Lss& lss, Annotation mode,
                            std::span<const LockSet> ownership = {});

// Throws Error(blocked) when the step is not executable.
GlobalConfig step(const Lss& lss, const GlobalConfig& cfg, int proc, int action,
                  Annotation mode);

struct StepRef {
  int proc = 0;
  int action = 0;
  auto operator<=>(const StepRef&) const = default;
};

std::vector<StepRef> enabled(const Lss& lss, const GlobalConfig& cfg, const Strategy& strategy);

struct RunStep {
  int proc = 0;
  int action = 0;
  Op op;
  auto operator<=>(const RunStep&) const = default;
};
using Run = std::vector<RunStep>;

std::vector<Op> project(const Run& run, int proc);

// True iff the run ends with the set of locks it started with.
bool is_neutral(std::span<const Op> local_run);

// Replays `run` from the initial configuration; throws Error(blocked) on failure.
GlobalConfig replay(const Lss& lss, const Run& run, Annotation mode,
                    std::span<const LockSet> ownership = {});

std::string describe(const Lss& lss, const RunStep& s);

}  // namespace lockctl

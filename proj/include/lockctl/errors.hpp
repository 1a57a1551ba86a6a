#pragma once

#include <stdexcept>
#include <string>

namespace lockctl {

enum class Errc {
  parse,
  duplicate_state,
  unknown_lock,
  unknown_state,
  nondeterministic_delta,
  action_in_both_partitions,
  too_large,
  blocked,
  not_nested,
  strategy_mismatch,
  not_locally_live,
  limit_exceeded,
  not_exclusive,
  not_two_lock,
  invalid_ownership,
  not_locally_live_behavior,
  invalid_argument,
};

constexpr const char* errc_name(Errc e) {
  switch (e) {
    case Errc::parse: return "ParseError";
    case Errc::duplicate_state: return "DuplicateState";
    case Errc::unknown_lock: return "UnknownLock";
    case Errc::unknown_state: return "UnknownState";
    case Errc::nondeterministic_delta: return "NondeterministicDelta";
    case Errc::action_in_both_partitions: return "ActionInBothPartitions";
    case Errc::too_large: return "TooLarge";
    case Errc::blocked: return "Blocked";
    case Errc::not_nested: return "NotNested";
    case Errc::strategy_mismatch: return "StrategyMismatch";
    case Errc::not_locally_live: return "NotLocallyLive";
    case Errc::limit_exceeded: return "LimitExceeded";
    case Errc::not_exclusive: return "NotExclusive";
    case Errc::not_two_lock: return "NotTwoLock";
    case Errc::invalid_ownership: return "InvalidOwnership";
    case Errc::not_locally_live_behavior: return "NotLocallyLiveBehavior";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace lockctl

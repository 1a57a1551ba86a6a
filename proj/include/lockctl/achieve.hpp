#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "lockctl/model.hpp"

namespace lockctl {

using PatternSet = boost::dynamic_bitset<>;

// Maps a risky annotated state and the locks its allowed gets request to a pattern id,
// or -1 when the pattern lies outside the universe.
using Classifier = std::function<int(const LocalState&, LockSet blocks)>;

// Interning table giving dense ids to pattern values.
template <class P>
class PatternTable {
public:
  int intern(const P& p) {
    auto [it, fresh] = ids_.emplace(p, static_cast<int>(items_.size()));
    if (fresh) items_.push_back(p);
    return it->second;
  }
  int find(const P& p) const {
    auto it = ids_.find(p);
    return it == ids_.end() ? -1 : it->second;
  }
  const P& at(int id) const { return items_.at(id); }
  std::size_t size() const { return items_.size(); }
  const std::vector<P>& items() const { return items_; }

private:
  std::map<P, int> ids_;
  std::vector<P> items_;
};

// Visits every (node, blocks) pair that some local strategy can make a risky endpoint.
void for_each_risky_option(const Process& p, const AnnotatedProcess& ap, bool locally_live,
                           const std::function<void(int node, LockSet blocks)>& visit);

// Ids of the patterns produced by `strategy` on its reachable annotated states.
PatternSet behaviour_of(const Process& p, const AnnotatedProcess& ap, const LocalStrategy& strategy,
                        const Classifier& classify, std::size_t universe);

// Greatest set of states from which the process can be kept inside `allowed`; returns a
// positional strategy listing every surviving state, or none when the initial state is lost.
std::optional<LocalStrategy> achieve(const Process& p, const AnnotatedProcess& ap,
                                     const Classifier& classify, const PatternSet& allowed,
                                     bool locally_live);

// A strategy under which the process can always move when run alone, or none.
std::optional<LocalStrategy> locally_live_strategy(const Process& p);

struct AchievableSet {
  PatternSet patterns;
  LocalStrategy strategy;
};

// All inclusion-minimal achievable pattern sets, smallest first, each with a certificate.
std::vector<AchievableSet> minimal_achievable(const Process& p, const AnnotatedProcess& ap,
                                              const Classifier& classify, std::size_t universe,
                                              bool locally_live, std::size_t max_nodes = 200'000);

}  // namespace lockctl

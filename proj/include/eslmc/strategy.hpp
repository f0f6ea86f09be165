#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "eslmc/errors.hpp"
#include "eslmc/model.hpp"

namespace eslmc {

enum class StrategyMode { Perfect, Uniform };

// The domain a recall-g strategy is defined on: every transition-connected
// state sequence of length 1..g over the reachable set. Windows are ordered
// by length, then lexicographically by state ids; that order fixes strategy
// table layout, enumeration order, and witness output.
class WindowSpace {
 public:
  WindowSpace(const Ecgm& model, int recall);

  const Ecgm& model() const { return *model_; }
  int recall() const { return recall_; }

  int count() const { return static_cast<int>(windows_.size()); }
  std::span<const StateId> window(int w) const { return windows_[w]; }
  StateId last_state(int w) const { return windows_[w].back(); }
  // Index of a feasible window; -1 when the sequence is not one.
  int index_of(std::span<const StateId> states) const;

  // Protocol options for the window's owner agent at its last state.
  std::span<const int> choices(AgentId agent, int w) const;

  // Uniform-mode grouping: windows whose per-position agent-local projections
  // coincide share one choice. Groups are numbered by first occurrence.
  int group_of(AgentId agent, int w) const { return groups_[agent][w]; }
  int group_count(AgentId agent) const { return group_counts_[agent]; }
  // First window (= table slot) of each group, ascending.
  std::span<const int> group_leaders(AgentId agent) const {
    return leaders_[agent];
  }

  // Number of distinct strategies for the agent, saturating at uint64 max.
  std::uint64_t strategy_count(AgentId agent, StrategyMode mode) const;

  std::string window_name(int w) const;

 private:
  const Ecgm* model_;
  int recall_;
  std::vector<std::vector<StateId>> windows_;
  std::unordered_map<std::string, int> index_;  // key: id sequence bytes
  std::vector<std::vector<int>> groups_;        // [agent][window] -> group
  std::vector<int> group_counts_;
  std::vector<std::vector<int>> leaders_;       // [agent][group] -> window

  static std::string key_of(std::span<const StateId> states);
};

// A recall-g strategy for one agent: a total table from windows to enabled
// actions, stored as one action index per window in canonical window order.
struct Strategy {
  AgentId agent = -1;
  int recall = 1;
  std::vector<std::uint16_t> choices;

  bool operator==(const Strategy&) const = default;
};

using StrategyPtr = std::shared_ptr<const Strategy>;

// Lexicographic random-access enumeration of an agent's strategies. Index 0
// is the table of canonically least actions; at(i) < at(j) as tables iff
// i < j.
class StrategyEnumerator {
 public:
  StrategyEnumerator(const WindowSpace& space, AgentId agent,
                     StrategyMode mode);

  std::uint64_t count() const { return count_; }
  Strategy at(std::uint64_t index) const;

 private:
  const WindowSpace* space_;
  AgentId agent_;
  StrategyMode mode_;
  std::uint64_t count_;
  // Mixed-radix layout over table slots (windows, or group leaders in
  // uniform mode), slot 0 most significant.
  std::vector<int> slots_;
  std::vector<std::uint64_t> radix_;
};

// A total assignment: one strategy per agent, all with the same recall.
struct Assignment {
  std::vector<StrategyPtr> by_agent;
  int recall = 1;
};

// New assignment equal to a except at agent, which plays s. a is unchanged.
Assignment override_strategy(const Assignment& a, AgentId agent,
                             StrategyPtr s);

// F^chi at a window: the joint action assembled from the members' tables.
std::vector<int> composed_action(const Assignment& a, int window);

// The unique outcome run from a state, folded at the first repeated window.
struct LassoRun {
  StateId origin;
  std::vector<StateId> prefix;
  std::vector<StateId> cycle;

  std::size_t length() const { return prefix.size() + cycle.size(); }
  StateId at(std::size_t i) const {
    return i < prefix.size()
               ? prefix[i]
               : cycle[(i - prefix.size()) % cycle.size()];
  }
};

LassoRun outcome_run(const WindowSpace& space, StateId from,
                     const Assignment& chi);

// Reads a recall-g strategy as a recall-(g+1) strategy that only consults the
// trailing g states of each window; outcome runs are unchanged.
Strategy embed_strategy(const WindowSpace& from_space,
                        const WindowSpace& to_space, const Strategy& s);

// Witness form: one "window => action" line per window, canonical order.
std::vector<std::string> format_strategy(const WindowSpace& space,
                                         const Strategy& s);

}  // namespace eslmc

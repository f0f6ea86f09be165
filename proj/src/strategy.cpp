#include "eslmc/strategy.hpp"

#include <algorithm>
#include <map>

namespace eslmc {

// ---------------------------------------------------------------------------
// WindowSpace
// ---------------------------------------------------------------------------

std::string WindowSpace::key_of(std::span<const StateId> states) {
  std::string key;
  key.reserve(states.size() * sizeof(StateId));
  for (StateId s : states)
    key.append(reinterpret_cast<const char*>(&s), sizeof(StateId));
  return key;
}

WindowSpace::WindowSpace(const Ecgm& model, int recall)
    : model_(&model), recall_(recall) {
  if (recall < 1)
    throw Error(ErrorKind::RecallZero, "recall must be at least 1");

  // Length-1 windows are the reachable states in canonical order; longer
  // windows extend shorter ones along the transition relation, so each
  // length block stays lexicographically sorted.
  std::vector<std::vector<StateId>> current;
  for (StateId s = 0; s < model.state_count(); ++s) current.push_back({s});
  for (int len = 1; len <= recall; ++len) {
    for (const auto& w : current) windows_.push_back(w);
    if (len == recall) break;
    std::vector<std::vector<StateId>> longer;
    for (const auto& w : current) {
      for (StateId t : model.successors(w.back())) {
        auto ext = w;
        ext.push_back(t);
        longer.push_back(std::move(ext));
      }
    }
    current = std::move(longer);
  }
  for (int w = 0; w < count(); ++w) index_.emplace(key_of(windows_[w]), w);

  const int n = model.agent_count();
  groups_.resize(n);
  group_counts_.assign(n, 0);
  leaders_.resize(n);
  for (AgentId i = 0; i < n; ++i) {
    groups_[i].assign(count(), -1);
    std::map<std::vector<int>, int> seen;  // projection -> group
    for (int w = 0; w < count(); ++w) {
      std::vector<int> projection;
      projection.reserve(windows_[w].size());
      for (StateId s : windows_[w])
        projection.push_back(model.state(s).locals[i]);
      auto [it, fresh] =
          seen.try_emplace(std::move(projection), group_counts_[i]);
      if (fresh) {
        ++group_counts_[i];
        leaders_[i].push_back(w);
      }
      groups_[i][w] = it->second;
    }
  }
}

int WindowSpace::index_of(std::span<const StateId> states) const {
  auto it = index_.find(key_of(states));
  return it == index_.end() ? -1 : it->second;
}

std::span<const int> WindowSpace::choices(AgentId agent, int w) const {
  const StateTuple& last = model_->state(windows_[w].back());
  return model_->agent(agent).protocol[last.locals[agent]];
}

std::uint64_t WindowSpace::strategy_count(AgentId agent,
                                          StrategyMode mode) const {
  constexpr std::uint64_t kMax = ~std::uint64_t{0};
  std::uint64_t n = 1;
  auto multiply = [&](std::uint64_t k) {
    if (k != 0 && n > kMax / k) n = kMax;
    else n *= k;
  };
  if (mode == StrategyMode::Perfect) {
    for (int w = 0; w < count(); ++w) multiply(choices(agent, w).size());
  } else {
    for (int leader : leaders_[agent]) multiply(choices(agent, leader).size());
  }
  return n;
}

std::string WindowSpace::window_name(int w) const {
  std::string out;
  for (std::size_t i = 0; i < windows_[w].size(); ++i) {
    if (i) out += ' ';
    out += model_->state_name(windows_[w][i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

StrategyEnumerator::StrategyEnumerator(const WindowSpace& space, AgentId agent,
                                       StrategyMode mode)
    : space_(&space), agent_(agent), mode_(mode) {
  if (agent < 0 || agent >= space.model().agent_count())
    throw Error(ErrorKind::UnknownAgent,
                "agent index " + std::to_string(agent) + " out of range");
  if (mode == StrategyMode::Perfect) {
    for (int w = 0; w < space.count(); ++w) slots_.push_back(w);
  } else {
    auto leaders = space.group_leaders(agent);
    slots_.assign(leaders.begin(), leaders.end());
  }
  // radix_[k] = product of option counts of the slots after k.
  radix_.assign(slots_.size(), 1);
  count_ = 1;
  constexpr std::uint64_t kMax = ~std::uint64_t{0};
  for (int k = static_cast<int>(slots_.size()) - 1; k >= 0; --k) {
    radix_[k] = count_;
    std::uint64_t options = space.choices(agent, slots_[k]).size();
    count_ = (options != 0 && count_ > kMax / options) ? kMax
                                                       : count_ * options;
  }
}

Strategy StrategyEnumerator::at(std::uint64_t index) const {
  Strategy s;
  s.agent = agent_;
  s.recall = space_->recall();
  s.choices.assign(space_->count(), 0);
  std::vector<std::uint16_t> slot_choice(slots_.size(), 0);
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    auto options = space_->choices(agent_, slots_[k]);
    std::uint64_t digit = (index / radix_[k]) % options.size();
    slot_choice[k] = static_cast<std::uint16_t>(options[digit]);
  }
  if (mode_ == StrategyMode::Perfect) {
    for (std::size_t k = 0; k < slots_.size(); ++k)
      s.choices[slots_[k]] = slot_choice[k];
  } else {
    for (int w = 0; w < space_->count(); ++w)
      s.choices[w] = slot_choice[space_->group_of(agent_, w)];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Assignments and outcomes
// ---------------------------------------------------------------------------

Assignment override_strategy(const Assignment& a, AgentId agent,
                             StrategyPtr s) {
  if (s->recall != a.recall)
    throw Error(ErrorKind::RecallMismatch,
                "strategy recall " + std::to_string(s->recall) +
                    " does not match assignment recall " +
                    std::to_string(a.recall));
  Assignment out = a;
  out.by_agent[agent] = std::move(s);
  return out;
}

std::vector<int> composed_action(const Assignment& a, int window) {
  std::vector<int> joint(a.by_agent.size());
  for (std::size_t i = 0; i < a.by_agent.size(); ++i)
    joint[i] = a.by_agent[i]->choices[window];
  return joint;
}

LassoRun outcome_run(const WindowSpace& space, StateId from,
                     const Assignment& chi) {
  const Ecgm& model = space.model();
  const int recall = space.recall();

  LassoRun run;
  run.origin = from;

  std::vector<StateId> states{from};
  std::vector<StateId> window{from};
  // Window ending at the current position -> position index. The run is
  // periodic from the first repeat onward.
  std::map<std::vector<StateId>, std::size_t> seen;
  for (;;) {
    auto [it, fresh] = seen.try_emplace(window, states.size() - 1);
    if (!fresh) {
      std::size_t start = it->second;
      run.prefix.assign(states.begin(), states.begin() + start);
      run.cycle.assign(states.begin() + start, states.end() - 1);
      return run;
    }
    int w = space.index_of(window);
    StateId next = model.step(states.back(), composed_action(chi, w));
    states.push_back(next);
    window.push_back(next);
    if (static_cast<int>(window.size()) > recall)
      window.erase(window.begin());
  }
}

Strategy embed_strategy(const WindowSpace& from_space,
                        const WindowSpace& to_space, const Strategy& s) {
  Strategy out;
  out.agent = s.agent;
  out.recall = to_space.recall();
  out.choices.assign(to_space.count(), 0);
  const int g = from_space.recall();
  for (int w = 0; w < to_space.count(); ++w) {
    auto states = to_space.window(w);
    auto suffix = states.size() > static_cast<std::size_t>(g)
                      ? states.subspan(states.size() - g)
                      : states;
    out.choices[w] = s.choices[from_space.index_of(suffix)];
  }
  return out;
}

std::vector<std::string> format_strategy(const WindowSpace& space,
                                         const Strategy& s) {
  std::vector<std::string> lines;
  lines.reserve(space.count());
  for (int w = 0; w < space.count(); ++w) {
    lines.push_back(space.window_name(w) + " => " +
                    space.model().agent(s.agent).actions[s.choices[w]]);
  }
  return lines;
}

}  // namespace eslmc

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "eslmc/formula.hpp"
#include "eslmc/model.hpp"
#include "eslmc/strategy.hpp"

namespace eslmc {

struct EvalConfig {
  int recall = 1;
  StrategyMode mode = StrategyMode::Perfect;
  std::uint64_t cap = 10'000'000;  // enumerable strategies per quantifier
  bool cache = true;
  int jobs = 1;
};

// One evaluation context over a fixed model and configuration. Holds the
// window space, hash-consed strategies, and the verdict cache. Queries are
// safe to issue from multiple threads.
class EvalSession {
 public:
  EvalSession(const Ecgm& model, EvalConfig cfg);

  const Ecgm& model() const { return *model_; }
  const EvalConfig& config() const { return cfg_; }
  const WindowSpace& windows() const { return windows_; }

  // Hash-consing: value-equal strategies map to one shared object with a
  // stable id, so cache keys can compare by id.
  StrategyPtr intern(Strategy&& s);
  std::uint32_t id_of(const StrategyPtr& s);

  // Strategy count for a quantifier over the agent; throws
  // SearchSpaceExceeded past the configured cap.
  std::uint64_t checked_count(AgentId agent) const;
  const StrategyEnumerator& enumerator(AgentId agent) const {
    return enumerators_[agent];
  }

  // Every agent plays the canonically least enabled action at every window.
  Assignment default_assignment();
  StrategyPtr strategy_at(AgentId agent, std::uint64_t index);

  // (P, s, chi) |= f. Memoized on (node, state, chi restricted to fr(f));
  // sentences ignore chi entirely.
  bool satisfies(StateId s, const Assignment& chi, const FormulaNode& f);

  // (P, s) |= f: satisfaction under every assignment. Only the free agents
  // are enumerated; bound agents keep the default strategy.
  bool satisfied_at_state(StateId s, const FormulaNode& f);

  // P |= f.
  bool holds_in_model(const FormulaNode& f);

  std::uint64_t cache_hits() const { return cache_hits_.load(); }
  std::uint64_t quantifier_iterations() const {
    return quantifier_iterations_.load();
  }

 private:
  struct CacheKey {
    std::uint32_t node;
    StateId state;
    std::vector<std::uint32_t> strategies;  // ids of free agents, ascending

    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const;
  };

  bool eval(StateId s, const Assignment& chi, const FormulaNode& f);

  const Ecgm* model_;
  EvalConfig cfg_;
  WindowSpace windows_;
  std::vector<StrategyEnumerator> enumerators_;

  std::mutex intern_mutex_;
  std::map<std::pair<AgentId, std::vector<std::uint16_t>>,
           std::pair<StrategyPtr, std::uint32_t>>
      interned_;
  std::unordered_map<const Strategy*, std::uint32_t> id_by_ptr_;

  std::mutex cache_mutex_;
  std::unordered_map<CacheKey, bool, CacheKeyHash> cache_;

  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> quantifier_iterations_{0};
};

}  // namespace eslmc

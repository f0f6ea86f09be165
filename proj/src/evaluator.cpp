#include "eslmc/evaluator.hpp"

namespace eslmc {

EvalSession::EvalSession(const Ecgm& model, EvalConfig cfg)
    : model_(&model), cfg_(cfg), windows_(model, cfg.recall) {
  enumerators_.reserve(model.agent_count());
  for (AgentId i = 0; i < model.agent_count(); ++i)
    enumerators_.emplace_back(windows_, i, cfg.mode);
}

std::size_t EvalSession::CacheKeyHash::operator()(const CacheKey& k) const {
  std::size_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(k.node);
  mix(static_cast<std::uint64_t>(k.state) + 0x9e3779b9u);
  for (std::uint32_t id : k.strategies) mix(id + 1);
  return h;
}

StrategyPtr EvalSession::intern(Strategy&& s) {
  std::lock_guard<std::mutex> lock(intern_mutex_);
  auto key = std::make_pair(s.agent, s.choices);
  auto it = interned_.find(key);
  if (it == interned_.end()) {
    auto ptr = std::make_shared<const Strategy>(std::move(s));
    auto id = static_cast<std::uint32_t>(interned_.size());
    it = interned_.emplace(std::move(key), std::make_pair(ptr, id)).first;
    id_by_ptr_.emplace(ptr.get(), id);
  }
  return it->second.first;
}

std::uint32_t EvalSession::id_of(const StrategyPtr& s) {
  std::lock_guard<std::mutex> lock(intern_mutex_);
  auto fast = id_by_ptr_.find(s.get());
  if (fast != id_by_ptr_.end()) return fast->second;
  // Externally built strategy: resolve by value, keep the object alive.
  auto key = std::make_pair(s->agent, s->choices);
  auto it = interned_.find(key);
  if (it == interned_.end()) {
    auto id = static_cast<std::uint32_t>(interned_.size());
    it = interned_.emplace(std::move(key), std::make_pair(s, id)).first;
  }
  id_by_ptr_.emplace(s.get(), it->second.second);
  return it->second.second;
}

std::uint64_t EvalSession::checked_count(AgentId agent) const {
  std::uint64_t n = enumerators_[agent].count();
  if (n > cfg_.cap) throw SearchSpaceExceeded(n, cfg_.cap);
  return n;
}

StrategyPtr EvalSession::strategy_at(AgentId agent, std::uint64_t index) {
  return intern(enumerators_[agent].at(index));
}

Assignment EvalSession::default_assignment() {
  Assignment chi;
  chi.recall = cfg_.recall;
  for (AgentId i = 0; i < model_->agent_count(); ++i)
    chi.by_agent.push_back(intern(enumerators_[i].at(0)));
  return chi;
}

bool EvalSession::satisfies(StateId s, const Assignment& chi,
                            const FormulaNode& f) {
  if (!cfg_.cache) return eval(s, chi, f);

  CacheKey key;
  key.node = f.id;
  key.state = s;
  for (AgentId i = 0; i < model_->agent_count(); ++i)
    if (f.fr & agent_bit(i))
      key.strategies.push_back(id_of(chi.by_agent[i]));
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      cache_hits_.fetch_add(1, std::memory_order_relaxed);
      return it->second;
    }
  }
  bool v = eval(s, chi, f);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.emplace(std::move(key), v);
  }
  return v;
}

bool EvalSession::eval(StateId s, const Assignment& chi,
                       const FormulaNode& f) {
  switch (f.kind) {
    case NodeKind::Atom:
      return model_->atom_holds(f.atom, s);

    case NodeKind::Not:
      return !satisfies(s, chi, *f.lhs);

    case NodeKind::Implies:
      return !satisfies(s, chi, *f.lhs) || satisfies(s, chi, *f.rhs);

    case NodeKind::Next: {
      StateId here[] = {s};
      int w = windows_.index_of(here);
      StateId next = model_->step(s, composed_action(chi, w));
      return satisfies(next, chi, *f.lhs);
    }

    case NodeKind::Until: {
      // Scan the unique outcome run. Verdicts at a position depend only on
      // the state there and chi, so one pass over prefix + cycle decides.
      LassoRun run = outcome_run(windows_, s, chi);
      for (std::size_t i = 0; i < run.length(); ++i) {
        StateId u = run.at(i);
        if (satisfies(u, chi, *f.rhs)) return true;
        if (!satisfies(u, chi, *f.lhs)) return false;
      }
      return false;  // the lasso closed without reaching the goal
    }

    case NodeKind::Know: {
      for (StateId t : model_->epistemic_class(f.agent, s))
        if (!satisfies(t, chi, *f.lhs)) return false;
      return true;
    }

    case NodeKind::Exists: {
      std::uint64_t n = checked_count(f.agent);
      for (std::uint64_t i = 0; i < n; ++i) {
        quantifier_iterations_.fetch_add(1, std::memory_order_relaxed);
        Assignment next = override_strategy(chi, f.agent,
                                            strategy_at(f.agent, i));
        if (satisfies(s, next, *f.lhs)) return true;
      }
      return false;
    }

    case NodeKind::Forall: {
      std::uint64_t n = checked_count(f.agent);
      for (std::uint64_t i = 0; i < n; ++i) {
        quantifier_iterations_.fetch_add(1, std::memory_order_relaxed);
        Assignment next = override_strategy(chi, f.agent,
                                            strategy_at(f.agent, i));
        if (!satisfies(s, next, *f.lhs)) return false;
      }
      return true;
    }
  }
  return false;
}

bool EvalSession::satisfied_at_state(StateId s, const FormulaNode& f) {
  // Enumerate assignments restricted to the free agents; the verdict cannot
  // depend on the bound ones, which stay at the default strategy.
  std::vector<AgentId> free;
  for (AgentId i = 0; i < model_->agent_count(); ++i)
    if (f.fr & agent_bit(i)) free.push_back(i);

  Assignment chi = default_assignment();
  if (free.empty()) return satisfies(s, chi, f);

  std::vector<std::uint64_t> counts;
  for (AgentId i : free) counts.push_back(checked_count(i));

  std::vector<std::uint64_t> index(free.size(), 0);
  for (;;) {
    Assignment candidate = chi;
    for (std::size_t k = 0; k < free.size(); ++k)
      candidate.by_agent[free[k]] = strategy_at(free[k], index[k]);
    if (!satisfies(s, candidate, f)) return false;
    int k = static_cast<int>(free.size()) - 1;
    while (k >= 0 && ++index[k] == counts[k]) index[k--] = 0;
    if (k < 0) return true;
  }
}

bool EvalSession::holds_in_model(const FormulaNode& f) {
  return satisfied_at_state(model_->initial(), f);
}

}  // namespace eslmc

#include "eslmc/checker.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <sstream>
#include <thread>

namespace eslmc {

namespace {

// Candidates below this are not worth spinning workers up for.
constexpr std::uint64_t kParallelThreshold = 64;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t kMax = ~std::uint64_t{0};
  if (b != 0 && a > kMax / b) return kMax;
  return a * b;
}

// Least index in [0, total) satisfying pred, scanning in parallel when asked.
// Workers claim ascending indices; one past the current best is never needed,
// so the result and the set of indices it implies were examined are
// schedule-independent.
std::optional<std::uint64_t> scan_first(std::uint64_t total, int jobs,
                                        const std::function<bool(uint64_t)>& pred) {
  if (jobs <= 1 || total < kParallelThreshold) {
    for (std::uint64_t i = 0; i < total; ++i)
      if (pred(i)) return i;
    return std::nullopt;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> best{~std::uint64_t{0}};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= total || i >= best.load(std::memory_order_relaxed)) return;
        if (pred(i)) {
          std::uint64_t cur = best.load(std::memory_order_relaxed);
          while (i < cur &&
                 !best.compare_exchange_weak(cur, i,
                                             std::memory_order_relaxed)) {
          }
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  std::uint64_t found = best.load();
  if (found < total) return found;
  return std::nullopt;
}

struct PrefixVar {
  std::string var;
  AgentId agent;
};

Verdict run_check(const Ecgm& model, const Formula& f, const EvalConfig& cfg,
                  ClosureMode mode, bool through_leading_exists) {
  auto t0 = std::chrono::steady_clock::now();

  EvalSession session(model, cfg);

  // The closed variables, in canonical agent order.
  std::vector<PrefixVar> prefix;
  {
    int k = 0;
    for (AgentId i = 0; i < model.agent_count(); ++i)
      if (f.node().fr & agent_bit(i))
        prefix.push_back({"y" + std::to_string(++k), i});
  }

  Verdict verdict;
  verdict.mode = mode;
  verdict.sentence = prefix.empty();

  // Optionally continue the search through the sentence's own leading
  // exists-block, so its quantifiers get explicit witnesses too.
  const FormulaNode* matrix = f.root.get();
  if (mode == ClosureMode::Existential && through_leading_exists) {
    while (matrix->kind == NodeKind::Exists) {
      prefix.push_back({matrix->var, matrix->agent});
      matrix = matrix->lhs.get();
    }
  }

  std::vector<std::uint64_t> counts;
  std::uint64_t total = 1;
  for (const auto& v : prefix) {
    counts.push_back(session.checked_count(v.agent));
    total = saturating_mul(total, counts.back());
  }

  Assignment base = session.default_assignment();
  auto candidate_at = [&](std::uint64_t index) {
    Assignment chi = base;
    // Mixed-radix decode, first prefix variable most significant.
    for (int k = static_cast<int>(prefix.size()) - 1; k >= 0; --k) {
      chi.by_agent[prefix[k].agent] =
          session.strategy_at(prefix[k].agent, index % counts[k]);
      index /= counts[k];
    }
    return chi;
  };

  if (prefix.empty()) {
    verdict.result = session.satisfies(model.initial(), base, *matrix);
    verdict.stats.candidates_total = 1;
    verdict.stats.candidates_examined = 1;
  } else if (mode == ClosureMode::Existential) {
    auto hit = scan_first(total, cfg.jobs, [&](std::uint64_t i) {
      return session.satisfies(model.initial(), candidate_at(i), *matrix);
    });
    verdict.result = hit.has_value();
    verdict.stats.candidates_total = total;
    verdict.stats.candidates_examined = hit ? *hit + 1 : total;
    if (hit) {
      Assignment chi = candidate_at(*hit);
      for (const auto& v : prefix) {
        WitnessEntry w;
        w.var = v.var;
        w.agent = model.agent(v.agent).name;
        w.strategy = chi.by_agent[v.agent];
        w.table = format_strategy(session.windows(), *w.strategy);
        verdict.witnesses.push_back(std::move(w));
      }
    }
  } else {
    auto miss = scan_first(total, cfg.jobs, [&](std::uint64_t i) {
      return !session.satisfies(model.initial(), candidate_at(i), *matrix);
    });
    verdict.result = !miss.has_value();
    verdict.stats.candidates_total = total;
    verdict.stats.candidates_examined = miss ? *miss + 1 : total;
  }

  verdict.stats.states_explored = model.state_count();
  verdict.stats.cache_hits = session.cache_hits();
  verdict.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return verdict;
}

}  // namespace

Formula existential_closure(const Formula& f) {
  FormulaPtr closed = f.root;
  std::vector<std::pair<std::string, AgentId>> vars;
  int k = 0;
  for (AgentId i = 0; i < static_cast<AgentId>(f.roster->agents.size()); ++i)
    if (f.node().fr & agent_bit(i)) vars.push_back({"y" + std::to_string(++k), i});
  for (auto it = vars.rbegin(); it != vars.rend(); ++it)
    closed = mk_exists(it->first, it->second, std::move(closed));
  return Formula{std::move(closed), f.roster};
}

Verdict model_check(const Ecgm& model, const Formula& f, const EvalConfig& cfg,
                    ClosureMode mode) {
  return run_check(model, f, cfg, mode, false);
}

Verdict model_check_with_leading_witnesses(const Ecgm& model, const Formula& f,
                                           const EvalConfig& cfg) {
  return run_check(model, f, cfg, ClosureMode::Existential, true);
}

const char* to_string(ClosureMode mode) {
  return mode == ClosureMode::Existential ? "existential" : "universal";
}

const char* to_string(StrategyMode mode) {
  return mode == StrategyMode::Perfect ? "perfect" : "uniform";
}

Report make_report(const Ecgm& model, const std::string& formula_text,
                   const Formula& f, const EvalConfig& cfg, ClosureMode mode,
                   Verdict verdict) {
  Report r;
  r.agents = model.agent_count();
  r.states = model.state_count();
  r.edges = model.edge_pair_count();
  r.formula = formula_text;
  QuantifierProfile p = profile(f);
  r.free_agents = agent_names(*f.roster, p.fr);
  r.bound_agents = agent_names(*f.roster, p.bnd);
  r.alternation = p.alt;
  r.sentence = p.is_sentence;
  r.recall = cfg.recall;
  r.mode = cfg.mode;
  r.closure = mode;
  r.cap = cfg.cap;
  r.verdict = std::move(verdict);
  return r;
}

nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["model"] = {{"agents", r.agents},
                {"reachable_states", r.states},
                {"edges", r.edges}};
  j["formula"] = {{"text", r.formula},
                  {"free", r.free_agents},
                  {"bound", r.bound_agents},
                  {"alternation", r.alternation},
                  {"sentence", r.sentence}};
  j["config"] = {{"recall", r.recall},
                 {"mode", to_string(r.mode)},
                 {"closure", to_string(r.closure)},
                 {"cap", r.cap}};
  nlohmann::ordered_json v;
  v["result"] = r.verdict.result;
  v["closure"] = r.verdict.sentence ? "none" : to_string(r.verdict.mode);
  nlohmann::ordered_json w = nlohmann::ordered_json::object();
  for (const auto& entry : r.verdict.witnesses) {
    w[entry.var] = {{"agent", entry.agent}, {"table", entry.table}};
  }
  v["witnesses"] = std::move(w);
  v["stats"] = {{"states_explored", r.verdict.stats.states_explored},
                {"candidates", r.verdict.stats.candidates_total},
                {"candidates_examined", r.verdict.stats.candidates_examined}};
  j["verdict"] = std::move(v);
  return j;
}

std::string to_text(const Report& r) {
  std::ostringstream out;
  out << "model: " << r.agents << " agents, " << r.states
      << " reachable states, " << r.edges << " transitions\n";
  out << "formula: " << r.formula << "\n";
  auto set = [](const std::vector<std::string>& names) {
    std::string s = "{";
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) s += ",";
      s += names[i];
    }
    return s + "}";
  };
  out << "  free: " << set(r.free_agents) << "  bound: " << set(r.bound_agents)
      << "  alternation: " << r.alternation
      << (r.sentence ? "  (sentence)" : "") << "\n";
  out << "config: recall=" << r.recall << " mode=" << to_string(r.mode)
      << " closure=" << to_string(r.closure) << " cap=" << r.cap << "\n";
  if (r.sentence)
    out << "note: the formula is a sentence; existential and universal "
           "closure coincide\n";
  out << "verdict: " << (r.verdict.result ? "TRUE" : "FALSE") << "\n";
  for (const auto& w : r.verdict.witnesses) {
    out << "witness " << w.var << ":" << w.agent << "\n";
    for (const auto& line : w.table) out << "  " << line << "\n";
  }
  out << "stats: " << r.verdict.stats.states_explored << " states, "
      << r.verdict.stats.candidates_total << " candidates, "
      << r.verdict.stats.candidates_examined << " examined, "
      << r.verdict.stats.cache_hits << " cache hits, "
      << r.verdict.stats.wall_ms << " ms\n";
  return out.str();
}

}  // namespace eslmc

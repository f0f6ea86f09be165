#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eslmc/evaluator.hpp"
#include "eslmc/formula.hpp"
#include "eslmc/model.hpp"
#include "eslmc/strategy.hpp"

namespace eslmc {

enum class ClosureMode { Existential, Universal };

// Counters that identical inputs must reproduce exactly, plus two
// informational ones (cache_hits, wall_ms) that depend on scheduling and are
// kept out of machine-readable reports.
struct CheckStats {
  int states_explored = 0;
  std::uint64_t candidates_total = 0;     // size of the closure product
  std::uint64_t candidates_examined = 0;  // decisive candidate index + 1
  std::uint64_t cache_hits = 0;
  double wall_ms = 0.0;
};

struct WitnessEntry {
  std::string var;
  std::string agent;
  StrategyPtr strategy;
  std::vector<std::string> table;  // "window => action" lines
};

struct Verdict {
  bool result = false;
  ClosureMode mode = ClosureMode::Existential;
  bool sentence = false;  // the closure added no quantifiers
  // Lexicographically least successful assignment for the closed variables;
  // only present for a true existential verdict.
  std::vector<WitnessEntry> witnesses;
  CheckStats stats;
};

// Prefixes exists-quantifiers y1..ym for the free agents of f in declaration
// order; the result is a sentence. Sentences come back unchanged.
Formula existential_closure(const Formula& f);

// The model checking problem: does some assignment satisfy f at the initial
// state? Universal mode asks instead whether every assignment does.
Verdict model_check(const Ecgm& model, const Formula& f,
                    const EvalConfig& cfg,
                    ClosureMode mode = ClosureMode::Existential);

// As above, but the witness search also runs through the maximal leading
// exists-block of the closed sentence. The QPTL frontend uses this to turn a
// top-level quantifier witness into a concrete evaluation.
Verdict model_check_with_leading_witnesses(const Ecgm& model, const Formula& f,
                                           const EvalConfig& cfg);

struct Report {
  int agents = 0;
  int states = 0;
  int edges = 0;
  std::string formula;
  std::vector<std::string> free_agents;
  std::vector<std::string> bound_agents;
  int alternation = 0;
  bool sentence = false;
  int recall = 1;
  StrategyMode mode = StrategyMode::Perfect;
  ClosureMode closure = ClosureMode::Existential;
  std::uint64_t cap = 0;
  Verdict verdict;
};

Report make_report(const Ecgm& model, const std::string& formula_text,
                   const Formula& f, const EvalConfig& cfg, ClosureMode mode,
                   Verdict verdict);

// Byte-deterministic for identical inputs and semantic config: no timings,
// no cache counters, no worker counts.
nlohmann::ordered_json to_json(const Report& r);
std::string to_text(const Report& r);

const char* to_string(ClosureMode mode);
const char* to_string(StrategyMode mode);

}  // namespace eslmc

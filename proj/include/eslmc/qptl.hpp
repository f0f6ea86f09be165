#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eslmc/checker.hpp"
#include "eslmc/formula.hpp"
#include "eslmc/model.hpp"

namespace eslmc {

// Core QPTL syntax. The parser desugars &, |, G, forall, true, false;
// F stays native.
enum class QKind { Atom, Not, Implies, Next, Until, Eventually, ExistsProp };

struct QptlNode;
using QptlPtr = std::shared_ptr<const QptlNode>;

struct QptlNode {
  QKind kind;
  std::string prop;   // Atom / ExistsProp
  QptlPtr lhs, rhs;
};

struct QptlFormula {
  QptlPtr root;
  std::vector<std::string> props;  // the declared AP, in declaration order
};

QptlPtr mkq_atom(std::string prop);
QptlPtr mkq_not(QptlPtr f);
QptlPtr mkq_implies(QptlPtr l, QptlPtr r);
QptlPtr mkq_next(QptlPtr f);
QptlPtr mkq_until(QptlPtr l, QptlPtr r);
QptlPtr mkq_eventually(QptlPtr f);
QptlPtr mkq_exists(std::string prop, QptlPtr f);

// Same concrete syntax as ESL formulas minus K, with "exists p." quantifying
// a declared proposition. Atoms must come from the declared list.
QptlFormula parse_qptl(std::string_view text,
                       std::vector<std::string> props);

// Effective exists/forall alternations, negation-polarity aware; identical
// counting to the ESL side.
int alternation_depth(const QptlNode& f);

// The valuation model over AP: one agent per proposition with locals {f, t},
// free choice of action {f, t} everywhere; an action writes the agent's next
// local state; the initial state is all-f; atom p holds where p's component
// is t. Reachable states: 2^|AP|.
nlohmann::json valuation_model_document(const std::vector<std::string>& props);
Ecgm build_valuation_model(const std::vector<std::string>& props);

// Formula translation: homomorphic on connectives and temporal operators,
// atoms become X p, and exists p becomes an ESL quantifier over p's agent.
// Alternation depth is preserved.
Formula translate(const QptlFormula& f, const Ecgm& valuation_model);

// An ultimately periodic temporal evaluation per proposition.
struct PeriodicEvaluation {
  struct Word {
    std::vector<bool> prefix;
    std::vector<bool> cycle;  // non-empty

    bool at(std::size_t n) const {
      return n < prefix.size()
                 ? prefix[n]
                 : cycle[(n - prefix.size()) % cycle.size()];
    }
  };
  std::map<std::string, Word> words;
};

// Direct QPTL evaluation of a formula whose quantified propositions are all
// fixed by the evaluation. Quantifiers under temporal operators are not
// supported here (Error(UnsupportedShape)).
bool qptl_eval_word(const QptlNode& f, const PeriodicEvaluation& eval);

enum class QptlStatus { Sat, Unsat };

struct QptlSatResult {
  QptlStatus status = QptlStatus::Unsat;  // Unsat is qualified by the recall
  int recall = 1;
  // For SAT: the evaluation induced by the witness assignment's outcome run,
  // and whether feeding it back to direct evaluation confirms the formula
  // (absent when the formula is not a prenex exists-block).
  std::optional<PeriodicEvaluation> evaluation;
  std::optional<bool> verified;
  std::vector<WitnessEntry> witnesses;
  CheckStats stats;
};

// Satisfiability via the reduction: model-check the existential closure of
// the translated formula over the valuation model at the given recall. SAT
// answers come with a concrete evaluation; UNSAT answers only rule out
// recall-g strategies.
QptlSatResult qptl_sat(const QptlFormula& f, const EvalConfig& cfg);

struct QptlOracleResult {
  QptlStatus status = QptlStatus::Unsat;  // Unsat qualified by the bounds
  int prefix_bound = 0;
  int period_bound = 0;
  std::optional<PeriodicEvaluation> evaluation;
};

// Independent brute-force satisfiability check: exhaustively searches
// ultimately periodic words within the bounds for every quantified (and
// free) proposition, evaluating by direct unrolling. Quantifiers must not
// appear under temporal operators.
QptlOracleResult qptl_oracle(const QptlFormula& f, int prefix_bound,
                             int period_bound);

std::string to_string(const PeriodicEvaluation& e);

}  // namespace eslmc

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "eslmc/errors.hpp"
#include "eslmc/model.hpp"

namespace eslmc {

// Core syntax. Derived connectives (&, |, F, G, true, false) are desugared by
// the parser and the mk_* helpers; an AST never contains them.
enum class NodeKind {
  Atom,     // atomic proposition
  Not,
  Implies,
  Next,
  Until,
  Know,     // K[agent]
  Exists,   // exists var:agent
  Forall,   // forall var:agent (kept native; provably the dual of Exists)
};

class FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

// Immutable syntax node. Each node carries a process-unique id (memoization
// key) and its free-agent set, computed at construction:
//   fr(p) = {}            fr(!f) = fr(K[i] f) = fr(f)
//   fr(f -> g) = fr(f) u fr(g)
//   fr(X f) = fr(f U g) = Ag
//   fr(exists x:i. f) = fr(forall x:i. f) = fr(f) \ {i}
class FormulaNode {
 public:
  NodeKind kind;
  std::uint32_t id;
  AgentSet fr = 0;

  std::string atom;      // Atom
  AgentId agent = -1;    // Know / Exists / Forall
  std::string var;       // Exists / Forall
  FormulaPtr lhs, rhs;   // children (rhs only for Implies / Until)

  const FormulaNode& child() const { return *lhs; }
  const FormulaNode& left() const { return *lhs; }
  const FormulaNode& right() const { return *rhs; }
};

// Agent roster an AST is bound to: names in declaration order. fr(X f) = Ag
// depends on it, so nodes are only meaningful relative to their roster.
struct Roster {
  std::vector<std::string> agents;

  static Roster of(const Ecgm& m);
  AgentSet all() const {
    return agents.size() == 64 ? ~AgentSet{0}
                               : (AgentSet{1} << agents.size()) - 1;
  }
  std::optional<AgentId> index_of(std::string_view name) const;
};

struct Formula {
  FormulaPtr root;
  std::shared_ptr<const Roster> roster;

  const FormulaNode& node() const { return *root; }
};

// Node constructors (fr is derived; Ag comes from the roster).
FormulaPtr mk_atom(std::string name);
FormulaPtr mk_not(FormulaPtr f);
FormulaPtr mk_implies(FormulaPtr l, FormulaPtr r);
FormulaPtr mk_next(FormulaPtr f, const Roster& roster);
FormulaPtr mk_until(FormulaPtr l, FormulaPtr r, const Roster& roster);
FormulaPtr mk_know(AgentId agent, FormulaPtr f);
FormulaPtr mk_exists(std::string var, AgentId agent, FormulaPtr f);
FormulaPtr mk_forall(std::string var, AgentId agent, FormulaPtr f);

// Derived forms, desugared to the core:
//   and(a,b) = !(a -> !b)        or(a,b) = !a -> b
//   tt = (tt -> tt) over a fixed atom name; ff = !tt
//   F f = tt U f                 G f = !(tt U !f)
FormulaPtr mk_true();
FormulaPtr mk_false();
FormulaPtr mk_and(FormulaPtr l, FormulaPtr r);
FormulaPtr mk_or(FormulaPtr l, FormulaPtr r);
FormulaPtr mk_eventually(FormulaPtr f, const Roster& roster);
FormulaPtr mk_globally(FormulaPtr f, const Roster& roster);

// Concrete syntax:
//   formula := quant | implies
//   quant   := ("exists" | "forall") IDENT ":" IDENT "." formula
//   implies := or ("->" formula)?
//   or      := and ("|" and)*
//   and     := until ("&" until)*
//   until   := unary ("U" until)?
//   unary   := "!" unary | "X" unary | "F" unary | "G" unary
//            | "K" "[" IDENT "]" unary | quant | atom
//   atom    := "true" | "false" | IDENT | "(" formula ")"
// A quantifier's scope extends maximally to the right, and a quantified
// formula may stand directly under a unary operator ("X K[B] exists y:B. f").
// Throws ParseError / Error(UnknownAgent).
Formula parse_formula(std::string_view text, const Roster& roster);
Formula parse_formula(std::string_view text,
                      std::shared_ptr<const Roster> roster);

inline AgentSet free_agents(const FormulaNode& f) { return f.fr; }
inline AgentSet bound_agents(const FormulaNode& f, const Roster& r) {
  return r.all() & ~f.fr;
}
inline bool is_sentence(const FormulaNode& f) { return f.fr == 0; }

// Maximum number of effective existential/universal switches along any
// root-to-leaf quantifier sequence. Negation parity flips a quantifier's
// effective kind (Not flips, the left child of Implies flips); K and the
// temporal operators are transparent. A single block counts as 0.
int alternation_depth(const FormulaNode& f);

struct QuantifierProfile {
  AgentSet fr;
  AgentSet bnd;
  int alt;
  bool is_sentence;
};
QuantifierProfile profile(const Formula& f);

// Unambiguous rendering: parse(to_string(f)) is structurally identical to f.
std::string to_string(const FormulaNode& f, const Roster& roster);
std::string to_string(const Formula& f);

bool structurally_equal(const FormulaNode& a, const FormulaNode& b);

std::vector<std::string> agent_names(const Roster& r, AgentSet set);

}  // namespace eslmc

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eslmc/errors.hpp"

namespace eslmc {

using AgentId = int;
using StateId = int;               // index into the canonical reachable list
using AgentSet = std::uint64_t;    // bitmask over agent indices (<= 64 agents)

inline AgentSet agent_bit(AgentId i) { return AgentSet{1} << i; }

// One agent: local states, actions, and the protocol mapping each local state
// to the non-empty set of actions available there. Locals and actions are
// referred to by their declaration index everywhere below.
struct AgentSpec {
  std::string name;
  std::vector<std::string> locals;
  std::vector<std::string> actions;
  // protocol[local] = action indices, sorted by declaration order, non-empty.
  std::vector<std::vector<int>> protocol;

  std::optional<int> local_index(std::string_view s) const;
  std::optional<int> action_index(std::string_view s) const;
};

// A global state as a tuple of local-state indices, one per agent in
// declaration order.
struct StateTuple {
  std::vector<int> locals;

  bool operator==(const StateTuple&) const = default;
  auto operator<=>(const StateTuple&) const = default;
};

// An A-action: a fixed action index for every agent in the carrier set and
// the placeholder (-1) elsewhere. A full joint action has carrier = Ag.
struct AAction {
  AgentSet carrier = 0;
  std::vector<int> parts;  // parts[i] = action index, or kPlaceholder

  static constexpr int kPlaceholder = -1;

  bool operator==(const AAction&) const = default;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  enum class Code {
    BadDocument,
    DuplicateIdentifier,
    UnknownIdentifier,
    EmptyProtocolEntry,
    DuplicateTransition,
    NotEnabledTransition,
    MissingEnabledTransition,
    UnreachableAtomState,  // warning: atom names a state outside S
  };

  Severity severity;
  Code code;
  std::string message;
};

struct ValidationResult;

// A validated epistemic concurrent game model. Immutable after construction;
// every query below is const and safe for concurrent readers.
//
// Canonical orders, used everywhere for deterministic results:
//   - agents, locals, actions: declaration order in the source document;
//   - reachable states: lexicographic by local-state indices;
//   - joint actions at a state: lexicographic by per-agent action indices.
class Ecgm {
 public:
  struct Edge {
    std::vector<int> action;  // full joint action, one index per agent
    StateId target;
  };

  // Validates a raw model document and either builds the model or reports
  // every violation found. Never throws on bad input.
  static ValidationResult validate(const nlohmann::json& document);
  static ValidationResult validate_text(std::string_view text);
  static ValidationResult validate_file(const std::string& path);

  int agent_count() const { return static_cast<int>(agents_.size()); }
  const AgentSpec& agent(AgentId i) const { return agents_[i]; }
  std::optional<AgentId> agent_index(std::string_view name) const;
  AgentSet all_agents() const {
    return agents_.size() == 64 ? ~AgentSet{0}
                                : (AgentSet{1} << agents_.size()) - 1;
  }

  StateId initial() const { return initial_; }
  int state_count() const { return static_cast<int>(states_.size()); }
  const StateTuple& state(StateId s) const { return states_[s]; }
  std::optional<StateId> state_index(const StateTuple& t) const;
  std::string state_name(StateId s) const;  // "(eA,eB)"

  // Outgoing transitions in canonical joint-action order.
  const std::vector<Edge>& edges_from(StateId s) const { return edges_[s]; }
  // Distinct successor states, sorted.
  const std::vector<StateId>& successors(StateId s) const {
    return successors_[s];
  }
  // Number of distinct (s, s') transition pairs over the reachable set.
  int edge_pair_count() const;

  // D_A(s): protocol-respecting A-actions at s, canonical order.
  std::vector<AAction> enabled_actions(StateId s, AgentSet carrier) const;
  std::vector<AAction> enabled_actions(const StateTuple& s,
                                       AgentSet carrier) const;
  bool is_enabled(StateId s, std::span<const int> joint) const;

  // tau(s, joint). Throws NotEnabled when the joint action is not enabled.
  StateId step(StateId s, std::span<const int> joint) const;

  // out(s, sigma_A): targets of all enabled joint extensions of the A-action.
  std::vector<StateId> outcome_of_action(StateId s, const AAction& a) const;

  bool indistinguishable(AgentId i, StateId s, StateId t) const;
  bool indistinguishable(AgentId i, const StateTuple& s,
                         const StateTuple& t) const;
  // All reachable states with the same i-component, canonical order.
  std::span<const StateId> epistemic_class(AgentId i, StateId s) const;

  const std::vector<std::string>& atom_names() const { return atom_names_; }
  bool has_atom(std::string_view name) const;
  // False for states outside the set and for undeclared atoms alike.
  bool atom_holds(std::string_view name, StateId s) const;

 private:
  friend struct ModelBuilder;

  void check_agent(AgentId i) const;

  std::vector<AgentSpec> agents_;
  std::vector<StateTuple> states_;  // canonical order; StateId = index
  StateId initial_ = 0;
  std::vector<std::vector<Edge>> edges_;
  std::vector<std::vector<StateId>> successors_;
  // Per agent: partition of S by local component. classes_[i][c] is a sorted
  // state list; class_of_[i][s] is the c for state s.
  std::vector<std::vector<std::vector<StateId>>> classes_;
  std::vector<std::vector<int>> class_of_;
  std::vector<std::string> atom_names_;
  std::map<std::string, std::vector<bool>, std::less<>> atoms_;
};

struct ValidationResult {
  std::optional<Ecgm> model;
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const { return errors.empty(); }
};

std::string to_string(const Diagnostic& d);
std::string to_string(Diagnostic::Code code);

}  // namespace eslmc

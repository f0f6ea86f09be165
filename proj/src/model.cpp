#include "eslmc/model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace eslmc {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::optional<int> AgentSpec::local_index(std::string_view s) const {
  for (std::size_t i = 0; i < locals.size(); ++i)
    if (locals[i] == s) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> AgentSpec::action_index(std::string_view s) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i] == s) return static_cast<int>(i);
  return std::nullopt;
}

std::string to_string(Diagnostic::Code code) {
  switch (code) {
    case Diagnostic::Code::BadDocument: return "BadDocument";
    case Diagnostic::Code::DuplicateIdentifier: return "DuplicateIdentifier";
    case Diagnostic::Code::UnknownIdentifier: return "UnknownIdentifier";
    case Diagnostic::Code::EmptyProtocolEntry: return "EmptyProtocolEntry";
    case Diagnostic::Code::DuplicateTransition: return "DuplicateTransition";
    case Diagnostic::Code::NotEnabledTransition: return "NotEnabledTransition";
    case Diagnostic::Code::MissingEnabledTransition:
      return "MissingEnabledTransition";
    case Diagnostic::Code::UnreachableAtomState: return "UnreachableAtomState";
  }
  return "?";
}

std::string to_string(const Diagnostic& d) {
  std::string out = d.severity == Diagnostic::Severity::Error ? "error"
                                                              : "warning";
  out += " [";
  out += to_string(d.code);
  out += "] ";
  out += d.message;
  return out;
}

// ---------------------------------------------------------------------------
// Validation and construction
// ---------------------------------------------------------------------------

struct ModelBuilder {
  const nlohmann::json& doc;
  ValidationResult result;
  Ecgm m;

  explicit ModelBuilder(const nlohmann::json& d) : doc(d) {}

  void error(Diagnostic::Code code, std::string msg) {
    result.errors.push_back(
        {Diagnostic::Severity::Error, code, std::move(msg)});
  }
  void warn(Diagnostic::Code code, std::string msg) {
    result.warnings.push_back(
        {Diagnostic::Severity::Warning, code, std::move(msg)});
  }

  std::optional<StateTuple> parse_state(const nlohmann::json& arr,
                                        const char* where) {
    if (!arr.is_array() ||
        arr.size() != static_cast<std::size_t>(m.agent_count())) {
      error(Diagnostic::Code::BadDocument,
            std::string(where) + ": expected one local state per agent");
      return std::nullopt;
    }
    StateTuple t;
    t.locals.reserve(arr.size());
    for (int i = 0; i < m.agent_count(); ++i) {
      if (!arr[i].is_string()) {
        error(Diagnostic::Code::BadDocument,
              std::string(where) + ": local states must be strings");
        return std::nullopt;
      }
      const std::string name = arr[i].get<std::string>();
      auto idx = m.agents_[i].local_index(name);
      if (!idx) {
        error(Diagnostic::Code::UnknownIdentifier,
              std::string(where) + ": '" + name +
                  "' is not a local state of agent " + m.agents_[i].name);
        return std::nullopt;
      }
      t.locals.push_back(*idx);
    }
    return t;
  }

  std::optional<std::vector<int>> parse_joint(const nlohmann::json& arr,
                                              const char* where) {
    if (!arr.is_array() ||
        arr.size() != static_cast<std::size_t>(m.agent_count())) {
      error(Diagnostic::Code::BadDocument,
            std::string(where) + ": expected one action per agent");
      return std::nullopt;
    }
    std::vector<int> joint;
    joint.reserve(arr.size());
    for (int i = 0; i < m.agent_count(); ++i) {
      if (!arr[i].is_string()) {
        error(Diagnostic::Code::BadDocument,
              std::string(where) + ": actions must be strings");
        return std::nullopt;
      }
      const std::string name = arr[i].get<std::string>();
      auto idx = m.agents_[i].action_index(name);
      if (!idx) {
        error(Diagnostic::Code::UnknownIdentifier,
              std::string(where) + ": '" + name +
                  "' is not an action of agent " + m.agents_[i].name);
        return std::nullopt;
      }
      joint.push_back(*idx);
    }
    return joint;
  }

  void build_agents() {
    const auto& agents = doc.at("agents");
    if (!agents.is_array() || agents.empty()) {
      error(Diagnostic::Code::BadDocument, "'agents' must be a non-empty array");
      return;
    }
    if (agents.size() > 64) {
      error(Diagnostic::Code::BadDocument, "at most 64 agents are supported");
      return;
    }
    std::set<std::string> seen_names;
    for (const auto& a : agents) {
      AgentSpec spec;
      if (!a.is_object() || !a.contains("name") || !a.contains("locals") ||
          !a.contains("actions") || !a.contains("protocol")) {
        error(Diagnostic::Code::BadDocument,
              "each agent needs name/locals/actions/protocol");
        continue;
      }
      spec.name = a.at("name").get<std::string>();
      if (!seen_names.insert(spec.name).second)
        error(Diagnostic::Code::DuplicateIdentifier,
              "duplicate agent name '" + spec.name + "'");
      for (const auto& l : a.at("locals")) {
        const std::string s = l.get<std::string>();
        if (spec.local_index(s))
          error(Diagnostic::Code::DuplicateIdentifier,
                "agent " + spec.name + ": duplicate local state '" + s + "'");
        else
          spec.locals.push_back(s);
      }
      for (const auto& x : a.at("actions")) {
        const std::string s = x.get<std::string>();
        if (spec.action_index(s))
          error(Diagnostic::Code::DuplicateIdentifier,
                "agent " + spec.name + ": duplicate action '" + s + "'");
        else
          spec.actions.push_back(s);
      }
      if (spec.locals.empty())
        error(Diagnostic::Code::BadDocument,
              "agent " + spec.name + ": needs at least one local state");
      if (spec.actions.empty())
        error(Diagnostic::Code::BadDocument,
              "agent " + spec.name + ": needs at least one action");

      spec.protocol.assign(spec.locals.size(), {});
      for (const auto& [key, value] : a.at("protocol").items()) {
        auto li = spec.local_index(key);
        if (!li) {
          error(Diagnostic::Code::UnknownIdentifier,
                "agent " + spec.name + ": protocol key '" + key +
                    "' is not a local state");
          continue;
        }
        std::set<int> acts;
        for (const auto& v : value) {
          const std::string s = v.get<std::string>();
          auto ai = spec.action_index(s);
          if (!ai) {
            error(Diagnostic::Code::UnknownIdentifier,
                  "agent " + spec.name + ": protocol action '" + s +
                      "' is not declared");
            continue;
          }
          acts.insert(*ai);
        }
        spec.protocol[*li].assign(acts.begin(), acts.end());
      }
      for (std::size_t l = 0; l < spec.locals.size(); ++l) {
        if (spec.protocol[l].empty())
          error(Diagnostic::Code::EmptyProtocolEntry,
                "agent " + spec.name + ": no enabled action at local state '" +
                    spec.locals[l] + "'");
      }
      m.agents_.push_back(std::move(spec));
    }
  }

  std::string tuple_name(const StateTuple& t) const {
    std::vector<std::string> parts;
    for (int i = 0; i < m.agent_count(); ++i)
      parts.push_back(m.agents_[i].locals[t.locals[i]]);
    return "(" + join(parts, ",") + ")";
  }

  std::string joint_name(std::span<const int> joint) const {
    std::vector<std::string> parts;
    for (int i = 0; i < m.agent_count(); ++i)
      parts.push_back(m.agents_[i].actions[joint[i]]);
    return "(" + join(parts, ",") + ")";
  }

  // Enabled joint actions at a tuple: cartesian product of protocol entries,
  // lexicographic by agent declaration order.
  std::vector<std::vector<int>> enabled_joints(const StateTuple& t) const {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(m.agent_count(), 0);
    std::vector<std::span<const int>> options;
    for (int i = 0; i < m.agent_count(); ++i)
      options.push_back(m.agents_[i].protocol[t.locals[i]]);
    // Mixed-radix scan; agent 0 is the most significant digit.
    std::vector<std::size_t> pos(m.agent_count(), 0);
    while (true) {
      std::vector<int> joint(m.agent_count());
      for (int i = 0; i < m.agent_count(); ++i) joint[i] = options[i][pos[i]];
      out.push_back(std::move(joint));
      int i = m.agent_count() - 1;
      while (i >= 0 && ++pos[i] == options[i].size()) pos[i--] = 0;
      if (i < 0) break;
    }
    return out;
  }

  void build() {
    if (!doc.is_object() || !doc.contains("agents") ||
        !doc.contains("initial") || !doc.contains("transitions") ||
        !doc.contains("atoms")) {
      error(Diagnostic::Code::BadDocument,
            "model document needs agents/initial/transitions/atoms");
      return;
    }
    build_agents();
    if (!result.ok()) return;

    auto initial = parse_state(doc.at("initial"), "initial");
    if (!initial) return;

    // Raw transition table keyed by (source tuple, joint action).
    std::map<std::pair<StateTuple, std::vector<int>>, StateTuple> table;
    for (const auto& tr : doc.at("transitions")) {
      if (!tr.is_object() || !tr.contains("from") || !tr.contains("action") ||
          !tr.contains("to")) {
        error(Diagnostic::Code::BadDocument,
              "each transition needs from/action/to");
        continue;
      }
      auto from = parse_state(tr.at("from"), "transition source");
      auto act = parse_joint(tr.at("action"), "transition action");
      auto to = parse_state(tr.at("to"), "transition target");
      if (!from || !act || !to) continue;
      auto key = std::make_pair(std::move(*from), std::move(*act));
      if (table.count(key)) {
        error(Diagnostic::Code::DuplicateTransition,
              "duplicate transition from " + tuple_name(key.first) + " on " +
                  joint_name(key.second));
        continue;
      }
      table.emplace(std::move(key), std::move(*to));
    }
    if (!result.ok()) return;

    // Reachability fixpoint. Enabledness is checked over reachable states
    // only; entries rooted at unreachable states are ignored.
    std::set<StateTuple> reached;
    std::deque<StateTuple> frontier;
    reached.insert(*initial);
    frontier.push_back(*initial);
    while (!frontier.empty()) {
      StateTuple s = std::move(frontier.front());
      frontier.pop_front();
      for (const auto& joint : enabled_joints(s)) {
        auto it = table.find({s, joint});
        if (it == table.end()) {
          error(Diagnostic::Code::MissingEnabledTransition,
                "no transition from " + tuple_name(s) + " on enabled action " +
                    joint_name(joint));
          continue;
        }
        if (reached.insert(it->second).second) frontier.push_back(it->second);
      }
      if (reached.size() > 1'000'000) {
        error(Diagnostic::Code::BadDocument,
              "reachable state space exceeds 1e6 states");
        return;
      }
    }

    // Entries at reachable states must be enabled (tau is defined iff the
    // action respects every protocol).
    for (const auto& [key, target] : table) {
      const auto& [src, joint] = key;
      if (!reached.count(src)) continue;
      bool enabled = true;
      for (int i = 0; i < m.agent_count(); ++i) {
        const auto& opts = m.agents_[i].protocol[src.locals[i]];
        if (!std::binary_search(opts.begin(), opts.end(), joint[i]))
          enabled = false;
      }
      if (!enabled)
        error(Diagnostic::Code::NotEnabledTransition,
              "transition from " + tuple_name(src) + " on " +
                  joint_name(joint) + " is not protocol-enabled");
      (void)target;
    }
    if (!result.ok()) return;

    // Canonical state order: lexicographic on local indices.
    m.states_.assign(reached.begin(), reached.end());
    std::map<StateTuple, StateId> ids;
    for (StateId s = 0; s < m.state_count(); ++s) ids[m.states_[s]] = s;
    m.initial_ = ids.at(*initial);

    m.edges_.resize(m.state_count());
    m.successors_.resize(m.state_count());
    for (StateId s = 0; s < m.state_count(); ++s) {
      std::set<StateId> succ;
      for (auto& joint : enabled_joints(m.states_[s])) {
        StateId t = ids.at(table.at({m.states_[s], joint}));
        succ.insert(t);
        m.edges_[s].push_back({std::move(joint), t});
      }
      m.successors_[s].assign(succ.begin(), succ.end());
    }

    // Epistemic partition per agent: group states by local component.
    m.classes_.resize(m.agent_count());
    m.class_of_.assign(m.agent_count(),
                       std::vector<int>(m.state_count(), -1));
    for (AgentId i = 0; i < m.agent_count(); ++i) {
      std::map<int, int> class_for_local;
      for (StateId s = 0; s < m.state_count(); ++s) {
        int local = m.states_[s].locals[i];
        auto [it, fresh] = class_for_local.try_emplace(
            local, static_cast<int>(m.classes_[i].size()));
        if (fresh) m.classes_[i].emplace_back();
        m.classes_[i][it->second].push_back(s);
        m.class_of_[i][s] = it->second;
      }
    }

    // Atom interpretation. States must be well formed; unreachable members
    // are legal but inert, so they only draw a warning.
    for (const auto& [name, states] : doc.at("atoms").items()) {
      std::vector<bool> bits(m.state_count(), false);
      for (const auto& st : states) {
        auto t = parse_state(st, ("atom '" + name + "'").c_str());
        if (!t) continue;
        auto it = ids.find(*t);
        if (it == ids.end()) {
          warn(Diagnostic::Code::UnreachableAtomState,
               "atom '" + name + "' names unreachable state " +
                   tuple_name(*t));
          continue;
        }
        bits[it->second] = true;
      }
      m.atom_names_.push_back(name);
      m.atoms_.emplace(name, std::move(bits));
    }
    if (!result.ok()) return;

    result.model = std::move(m);
  }
};

ValidationResult Ecgm::validate(const nlohmann::json& document) {
  ModelBuilder builder(document);
  builder.build();
  return std::move(builder.result);
}

ValidationResult Ecgm::validate_text(std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    ValidationResult r;
    r.errors.push_back({Diagnostic::Severity::Error,
                        Diagnostic::Code::BadDocument, "invalid JSON"});
    return r;
  }
  return validate(doc);
}

ValidationResult Ecgm::validate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ValidationResult r;
    r.errors.push_back({Diagnostic::Severity::Error,
                        Diagnostic::Code::BadDocument,
                        "cannot open '" + path + "'"});
    return r;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return validate_text(buf.str());
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

void Ecgm::check_agent(AgentId i) const {
  if (i < 0 || i >= agent_count())
    throw Error(ErrorKind::UnknownAgent,
                "agent index " + std::to_string(i) + " out of range");
}

std::optional<AgentId> Ecgm::agent_index(std::string_view name) const {
  for (AgentId i = 0; i < agent_count(); ++i)
    if (agents_[i].name == name) return i;
  return std::nullopt;
}

std::optional<StateId> Ecgm::state_index(const StateTuple& t) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), t);
  if (it != states_.end() && *it == t)
    return static_cast<StateId>(it - states_.begin());
  return std::nullopt;
}

std::string Ecgm::state_name(StateId s) const {
  std::vector<std::string> parts;
  for (AgentId i = 0; i < agent_count(); ++i)
    parts.push_back(agents_[i].locals[states_[s].locals[i]]);
  return "(" + join(parts, ",") + ")";
}

int Ecgm::edge_pair_count() const {
  int n = 0;
  for (const auto& succ : successors_) n += static_cast<int>(succ.size());
  return n;
}

std::vector<AAction> Ecgm::enabled_actions(const StateTuple& t,
                                           AgentSet carrier) const {
  for (AgentId i = 0; i < agent_count(); ++i)
    if ((carrier & agent_bit(i)) && t.locals[i] < 0)
      throw Error(ErrorKind::BadModel, "malformed state tuple");
  if (carrier >> agent_count())
    throw Error(ErrorKind::UnknownAgent, "carrier names undeclared agents");

  std::vector<AgentId> fixed;
  for (AgentId i = 0; i < agent_count(); ++i)
    if (carrier & agent_bit(i)) fixed.push_back(i);

  std::vector<AAction> out;
  AAction cur;
  cur.carrier = carrier;
  cur.parts.assign(agent_count(), AAction::kPlaceholder);
  // Product over the carrier agents' protocol entries, carrier agents in
  // declaration order, most significant first.
  std::vector<std::size_t> pos(fixed.size(), 0);
  while (true) {
    for (std::size_t k = 0; k < fixed.size(); ++k) {
      AgentId i = fixed[k];
      cur.parts[i] = agents_[i].protocol[t.locals[i]][pos[k]];
    }
    out.push_back(cur);
    int k = static_cast<int>(fixed.size()) - 1;
    while (k >= 0 &&
           ++pos[k] == agents_[fixed[k]].protocol[t.locals[fixed[k]]].size())
      pos[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

std::vector<AAction> Ecgm::enabled_actions(StateId s, AgentSet carrier) const {
  return enabled_actions(states_[s], carrier);
}

bool Ecgm::is_enabled(StateId s, std::span<const int> joint) const {
  const StateTuple& t = states_[s];
  for (AgentId i = 0; i < agent_count(); ++i) {
    const auto& opts = agents_[i].protocol[t.locals[i]];
    if (!std::binary_search(opts.begin(), opts.end(), joint[i])) return false;
  }
  return true;
}

StateId Ecgm::step(StateId s, std::span<const int> joint) const {
  for (const Edge& e : edges_[s]) {
    if (std::equal(e.action.begin(), e.action.end(), joint.begin(),
                   joint.end()))
      return e.target;
  }
  throw Error(ErrorKind::NotEnabled,
              "action not enabled at " + state_name(s));
}

std::vector<StateId> Ecgm::outcome_of_action(StateId s,
                                             const AAction& a) const {
  // Every edge whose joint action extends the A-action.
  if (a.carrier >> agent_count())
    throw Error(ErrorKind::UnknownAgent, "carrier names undeclared agents");
  const StateTuple& t = states_[s];
  for (AgentId i = 0; i < agent_count(); ++i) {
    if (!(a.carrier & agent_bit(i))) continue;
    const auto& opts = agents_[i].protocol[t.locals[i]];
    if (!std::binary_search(opts.begin(), opts.end(), a.parts[i]))
      throw Error(ErrorKind::NotEnabled,
                  "A-action not enabled at " + state_name(s));
  }
  std::set<StateId> out;
  for (const Edge& e : edges_[s]) {
    bool extends = true;
    for (AgentId i = 0; i < agent_count(); ++i)
      if ((a.carrier & agent_bit(i)) && e.action[i] != a.parts[i])
        extends = false;
    if (extends) out.insert(e.target);
  }
  return {out.begin(), out.end()};
}

bool Ecgm::indistinguishable(AgentId i, StateId s, StateId t) const {
  check_agent(i);
  return states_[s].locals[i] == states_[t].locals[i];
}

bool Ecgm::indistinguishable(AgentId i, const StateTuple& s,
                             const StateTuple& t) const {
  check_agent(i);
  return s.locals[i] == t.locals[i];
}

std::span<const StateId> Ecgm::epistemic_class(AgentId i, StateId s) const {
  check_agent(i);
  return classes_[i][class_of_[i][s]];
}

bool Ecgm::has_atom(std::string_view name) const {
  return atoms_.find(name) != atoms_.end();
}

bool Ecgm::atom_holds(std::string_view name, StateId s) const {
  auto it = atoms_.find(name);
  if (it == atoms_.end()) return false;
  return it->second[s];
}

}  // namespace eslmc

#include "support/generators.hpp"

#include <functional>

#ifndef ESLMC_REPO_ROOT
#error "ESLMC_REPO_ROOT must point at the repository root"
#endif

namespace eslmc::testing {

const char* toy_model_path() {
  return ESLMC_REPO_ROOT "/examples/matching-pennies.json";
}

Ecgm load_toy_model() {
  ValidationResult r = Ecgm::validate_file(toy_model_path());
  if (!r.ok())
    throw Error(ErrorKind::BadModel, "toy model failed to validate");
  return std::move(*r.model);
}

Ecgm make_self_loop_model() {
  ValidationResult r = Ecgm::validate_text(R"({
    "agents": [{"name": "S", "locals": ["l"], "actions": ["a"],
                "protocol": {"l": ["a"]}}],
    "initial": ["l"],
    "transitions": [{"from": ["l"], "action": ["a"], "to": ["l"]}],
    "atoms": {}
  })");
  return std::move(*r.model);
}

namespace {

int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

FormulaPtr random_node(Rng& rng, const Ecgm& model, const Roster& roster,
                       const FormulaOptions& opt, int depth) {
  auto atom = [&]() -> FormulaPtr {
    const auto& names = model.atom_names();
    // Occasionally an undeclared atom; it is false everywhere.
    if (names.empty() || pick(rng, 0, 9) == 0) return mk_atom("undeclared");
    return mk_atom(names[pick(rng, 0, static_cast<int>(names.size()) - 1)]);
  };
  if (depth <= 0) return atom();

  int kind = pick(rng, 0, 11);
  switch (kind) {
    case 0:
    case 1:
      return atom();
    case 2:
      return mk_not(random_node(rng, model, roster, opt, depth - 1));
    case 3:
      return mk_implies(random_node(rng, model, roster, opt, depth - 1),
                        random_node(rng, model, roster, opt, depth - 1));
    case 4:
      return mk_and(random_node(rng, model, roster, opt, depth - 1),
                    random_node(rng, model, roster, opt, depth - 1));
    case 5:
      return mk_or(random_node(rng, model, roster, opt, depth - 1),
                   random_node(rng, model, roster, opt, depth - 1));
    case 6:
      return mk_next(random_node(rng, model, roster, opt, depth - 1), roster);
    case 7:
      return mk_until(random_node(rng, model, roster, opt, depth - 1),
                      random_node(rng, model, roster, opt, depth - 1), roster);
    case 8:
      return mk_eventually(random_node(rng, model, roster, opt, depth - 1),
                           roster);
    case 9: {
      if (!opt.allow_know) return atom();
      AgentId i = pick(rng, 0, model.agent_count() - 1);
      return mk_know(i, random_node(rng, model, roster, opt, depth - 1));
    }
    case 10:
    case 11: {
      if (!opt.allow_quantifiers) return atom();
      AgentId i = pick(rng, 0, model.agent_count() - 1);
      std::string var = "v" + std::to_string(pick(rng, 0, 9));
      FormulaPtr body = random_node(rng, model, roster, opt, depth - 1);
      return pick(rng, 0, 1) ? mk_exists(var, i, std::move(body))
                             : mk_forall(var, i, std::move(body));
    }
  }
  return atom();
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > ~std::uint64_t{0} / b) return ~std::uint64_t{0};
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return a > ~std::uint64_t{0} - b ? ~std::uint64_t{0} : a + b;
}

}  // namespace

std::uint64_t naive_cost_estimate(const FormulaNode& f, const WindowSpace& ws,
                                  StrategyMode mode) {
  const std::uint64_t horizon = ws.count() + 1;
  switch (f.kind) {
    case NodeKind::Atom:
      return 1;
    case NodeKind::Not:
    case NodeKind::Next:
      return sat_add(1, naive_cost_estimate(*f.lhs, ws, mode));
    case NodeKind::Implies:
      return sat_add(naive_cost_estimate(*f.lhs, ws, mode),
                     naive_cost_estimate(*f.rhs, ws, mode));
    case NodeKind::Until:
      return sat_mul(sat_mul(horizon, horizon),
                     sat_add(naive_cost_estimate(*f.lhs, ws, mode),
                             naive_cost_estimate(*f.rhs, ws, mode)));
    case NodeKind::Know:
      return sat_mul(ws.model().state_count(),
                     naive_cost_estimate(*f.lhs, ws, mode));
    case NodeKind::Exists:
    case NodeKind::Forall:
      return sat_mul(ws.strategy_count(f.agent, mode),
                     naive_cost_estimate(*f.lhs, ws, mode));
  }
  return 1;
}

Formula random_formula(Rng& rng, const Ecgm& model,
                       const FormulaOptions& opt) {
  auto roster = std::make_shared<const Roster>(Roster::of(model));
  WindowSpace ws(model, 2);
  for (;;) {
    FormulaPtr root =
        random_node(rng, model, *roster, opt, pick(rng, 1, opt.max_depth));
    // Bound the nested quantifier product so evaluation stays quick even
    // when every branch is explored.
    std::uint64_t product = 1;
    std::function<void(const FormulaNode&)> walk =
        [&](const FormulaNode& node) {
          if (node.kind == NodeKind::Exists || node.kind == NodeKind::Forall)
            product = sat_mul(product,
                              ws.strategy_count(node.agent,
                                                StrategyMode::Perfect));
          if (node.lhs) walk(*node.lhs);
          if (node.rhs) walk(*node.rhs);
        };
    walk(*root);
    if (product <= opt.quantifier_budget)
      return Formula{std::move(root), roster};
  }
}

Formula random_sentence(Rng& rng, const Ecgm& model, int recall,
                        const FormulaOptions& opt) {
  WindowSpace ws(model, recall);
  for (;;) {
    Formula f = random_formula(rng, model, opt);
    FormulaPtr closed = f.root;
    for (AgentId i = model.agent_count() - 1; i >= 0; --i) {
      if (!(closed->fr & agent_bit(i))) continue;
      std::string var = "c" + std::to_string(i);
      closed = pick(rng, 0, 1) ? mk_exists(var, i, std::move(closed))
                               : mk_forall(var, i, std::move(closed));
    }
    if (naive_cost_estimate(*closed, ws, StrategyMode::Perfect) <=
        opt.naive_budget)
      return Formula{std::move(closed), f.roster};
  }
}

Ecgm random_small_model(Rng& rng, int max_states,
                        std::uint64_t max_strategies) {
  for (;;) {
    nlohmann::json doc;
    doc["agents"] = nlohmann::json::array();
    std::vector<std::vector<std::string>> locals(2), actions(2);
    for (int i = 0; i < 2; ++i) {
      int n_locals = pick(rng, 1, 3);
      int n_actions = pick(rng, 1, 2);
      for (int l = 0; l < n_locals; ++l)
        locals[i].push_back("l" + std::to_string(l));
      for (int a = 0; a < n_actions; ++a)
        actions[i].push_back("a" + std::to_string(a));
      nlohmann::json protocol = nlohmann::json::object();
      for (const auto& l : locals[i]) {
        std::vector<std::string> enabled;
        for (const auto& a : actions[i])
          if (pick(rng, 0, 1)) enabled.push_back(a);
        if (enabled.empty())
          enabled.push_back(actions[i][pick(
              rng, 0, static_cast<int>(actions[i].size()) - 1)]);
        protocol[l] = enabled;
      }
      doc["agents"].push_back({{"name", i == 0 ? "P" : "Q"},
                               {"locals", locals[i]},
                               {"actions", actions[i]},
                               {"protocol", protocol}});
    }
    doc["initial"] = {locals[0][0], locals[1][0]};

    // Total table over every global state and enabled joint action, so the
    // enabledness check holds wherever reachability lands.
    doc["transitions"] = nlohmann::json::array();
    auto random_state = [&]() {
      return std::vector<std::string>{
          locals[0][pick(rng, 0, static_cast<int>(locals[0].size()) - 1)],
          locals[1][pick(rng, 0, static_cast<int>(locals[1].size()) - 1)]};
    };
    for (const auto& l0 : locals[0]) {
      for (const auto& l1 : locals[1]) {
        for (const auto& a0 : actions[0]) {
          for (const auto& a1 : actions[1]) {
            doc["transitions"].push_back(
                {{"from", {l0, l1}},
                 {"action", {a0, a1}},
                 {"to", random_state()}});
          }
        }
      }
    }

    doc["atoms"] = nlohmann::json::object();
    int n_atoms = pick(rng, 1, 3);
    for (int k = 0; k < n_atoms; ++k) {
      auto members = nlohmann::json::array();
      for (const auto& l0 : locals[0])
        for (const auto& l1 : locals[1])
          if (pick(rng, 0, 1)) members.push_back({l0, l1});
      doc["atoms"]["p" + std::to_string(k)] = std::move(members);
    }

    // Protocol entries wider than the transition table are fine here: the
    // table covers every (state, enabled action) pair by construction.
    ValidationResult r = Ecgm::validate(doc);
    if (!r.ok()) continue;
    if (r.model->state_count() > max_states) continue;
    WindowSpace ws(*r.model, 2);
    if (ws.strategy_count(0, StrategyMode::Perfect) > max_strategies ||
        ws.strategy_count(1, StrategyMode::Perfect) > max_strategies)
      continue;
    return std::move(*r.model);
  }
}

Assignment random_assignment(Rng& rng, EvalSession& session) {
  Assignment chi;
  chi.recall = session.config().recall;
  for (AgentId i = 0; i < session.model().agent_count(); ++i) {
    std::uint64_t count = session.enumerator(i).count();
    std::uint64_t index = std::uniform_int_distribution<std::uint64_t>(
        0, count - 1)(rng);
    chi.by_agent.push_back(session.strategy_at(i, index));
  }
  return chi;
}

namespace {

QptlPtr random_qptl_node(Rng& rng, const std::vector<std::string>& props,
                         int depth, bool quantifiers) {
  auto atom = [&]() {
    return mkq_atom(props[pick(rng, 0, static_cast<int>(props.size()) - 1)]);
  };
  if (depth <= 0) return atom();
  switch (pick(rng, 0, quantifiers ? 7 : 6)) {
    case 0:
      return atom();
    case 1:
      return mkq_not(random_qptl_node(rng, props, depth - 1, quantifiers));
    case 2:
      return mkq_implies(random_qptl_node(rng, props, depth - 1, quantifiers),
                         random_qptl_node(rng, props, depth - 1, quantifiers));
    case 3:
      return mkq_next(random_qptl_node(rng, props, depth - 1, quantifiers));
    case 4:
      return mkq_until(random_qptl_node(rng, props, depth - 1, quantifiers),
                       random_qptl_node(rng, props, depth - 1, quantifiers));
    case 5:
    case 6:
      return mkq_eventually(
          random_qptl_node(rng, props, depth - 1, quantifiers));
    default:
      return mkq_exists(
          props[pick(rng, 0, static_cast<int>(props.size()) - 1)],
          random_qptl_node(rng, props, depth - 1, quantifiers));
  }
}

}  // namespace

QptlPtr random_qptl_body(Rng& rng, const std::vector<std::string>& props,
                         int max_depth) {
  return random_qptl_node(rng, props, pick(rng, 1, max_depth), false);
}

QptlPtr random_qptl_formula(Rng& rng, const std::vector<std::string>& props,
                            int max_depth) {
  return random_qptl_node(rng, props, pick(rng, 1, max_depth), true);
}

}  // namespace eslmc::testing

#include <doctest.h>

#include <map>
#include <set>

#include "eslmc/strategy.hpp"
#include "support/generators.hpp"
#include "support/naive_eval.hpp"

using namespace eslmc;
using eslmc::testing::load_toy_model;
using eslmc::testing::make_self_loop_model;

namespace {

// Positional strategy: the protocol's least action everywhere, except where
// the map pins a specific action at a one-state window.
StrategyPtr positional(const Ecgm& m, const WindowSpace& space, AgentId agent,
                       std::map<std::string, std::string> pinned) {
  Strategy s;
  s.agent = agent;
  s.recall = space.recall();
  s.choices.assign(space.count(), 0);
  for (int w = 0; w < space.count(); ++w) {
    auto options = space.choices(agent, w);
    s.choices[w] = static_cast<std::uint16_t>(options.front());
    auto window = space.window(w);
    if (window.size() == 1) {
      auto it = pinned.find(m.state_name(window[0]));
      if (it != pinned.end())
        s.choices[w] = static_cast<std::uint16_t>(
            *m.agent(agent).action_index(it->second));
    }
  }
  return std::make_shared<const Strategy>(std::move(s));
}

std::vector<std::string> names_of(const Ecgm& m,
                                  const std::vector<StateId>& states) {
  std::vector<std::string> out;
  for (StateId s : states) out.push_back(m.state_name(s));
  return out;
}

}  // namespace

TEST_CASE("feasible windows: singletons plus connected extensions") {
  Ecgm toy = load_toy_model();
  CHECK(WindowSpace(toy, 1).count() == 7);

  // Length-2 windows are exactly the transition pairs; count them directly.
  std::set<std::pair<StateId, StateId>> pairs;
  for (StateId s = 0; s < toy.state_count(); ++s)
    for (StateId t : toy.successors(s)) pairs.insert({s, t});
  CHECK(pairs.size() == 10);
  CHECK(WindowSpace(toy, 2).count() == 7 + static_cast<int>(pairs.size()));

  Ecgm loop = make_self_loop_model();
  CHECK(WindowSpace(loop, 3).count() == 3);

  CHECK_THROWS_AS(WindowSpace(toy, 0), Error);
}

TEST_CASE("window adjacency and canonical order") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 3);
  std::size_t previous_len = 1;
  for (int w = 0; w < space.count(); ++w) {
    auto states = space.window(w);
    CHECK(states.size() >= previous_len);  // ordered by length first
    previous_len = states.size();
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
      const auto& succ = toy.successors(states[k]);
      CHECK(std::binary_search(succ.begin(), succ.end(), states[k + 1]));
    }
    CHECK(space.index_of(states) == w);
  }
}

TEST_CASE("positional strategy counts on the toy game") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 1);
  AgentId A = *toy.agent_index("A");
  AgentId B = *toy.agent_index("B");
  CHECK(space.strategy_count(A, StrategyMode::Perfect) == 2);
  CHECK(space.strategy_count(B, StrategyMode::Perfect) == 4);
  CHECK(space.strategy_count(B, StrategyMode::Uniform) == 2);
  CHECK(space.strategy_count(A, StrategyMode::Uniform) == 2);

  // The naive recursive enumeration agrees.
  naive::NaiveEvaluator nv(toy, 1, StrategyMode::Perfect);
  CHECK(nv.strategy_count(A) == 2);
  CHECK(nv.strategy_count(B) == 4);
  naive::NaiveEvaluator nu(toy, 1, StrategyMode::Uniform);
  CHECK(nu.strategy_count(B) == 2);
}

TEST_CASE("enumeration is lexicographic and respects protocols") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 2);
  for (AgentId agent = 0; agent < toy.agent_count(); ++agent) {
    for (StrategyMode mode : {StrategyMode::Perfect, StrategyMode::Uniform}) {
      StrategyEnumerator en(space, agent, mode);
      Strategy previous;
      for (std::uint64_t i = 0; i < en.count(); ++i) {
        Strategy s = en.at(i);
        for (int w = 0; w < space.count(); ++w) {
          auto options = space.choices(agent, w);
          CHECK(std::count(options.begin(), options.end(), s.choices[w]) == 1);
        }
        if (i > 0) CHECK(previous.choices < s.choices);
        previous = std::move(s);
      }
    }
  }
}

TEST_CASE("uniform strategies are a subset of perfect ones") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 2);
  for (AgentId agent = 0; agent < toy.agent_count(); ++agent) {
    StrategyEnumerator perfect(space, agent, StrategyMode::Perfect);
    StrategyEnumerator uniform(space, agent, StrategyMode::Uniform);
    std::set<std::vector<std::uint16_t>> all;
    for (std::uint64_t i = 0; i < perfect.count(); ++i)
      all.insert(perfect.at(i).choices);
    for (std::uint64_t i = 0; i < uniform.count(); ++i) {
      Strategy s = uniform.at(i);
      CHECK(all.count(s.choices) == 1);
      // Constant across windows with equal local projections.
      for (int w = 0; w < space.count(); ++w)
        CHECK(s.choices[w] ==
              s.choices[space.group_leaders(agent)[space.group_of(agent, w)]]);
    }
  }
}

TEST_CASE("composition assembles per-slot lookups") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 1);
  AgentId A = *toy.agent_index("A");
  AgentId B = *toy.agent_index("B");

  Assignment chi;
  chi.recall = 1;
  chi.by_agent.resize(2);
  chi.by_agent[A] = positional(toy, space, A, {{"(eA,eB)", "set0"}});
  chi.by_agent[B] = positional(toy, space, B,
                               {{"(0,lam)", "set1"}, {"(1,lam)", "set0"}});

  StateId s0 = *toy.state_index(
      {{*toy.agent(0).local_index("eA"), *toy.agent(1).local_index("eB")}});
  StateId s0lam = *toy.state_index(
      {{*toy.agent(0).local_index("0"), *toy.agent(1).local_index("lam")}});

  StateId here0[] = {s0};
  auto joint = composed_action(chi, space.index_of(here0));
  CHECK(joint == std::vector<int>{*toy.agent(A).action_index("set0"),
                                  *toy.agent(B).action_index("wait")});
  CHECK(toy.is_enabled(s0, joint));

  StateId here1[] = {s0lam};
  joint = composed_action(chi, space.index_of(here1));
  CHECK(joint == std::vector<int>{*toy.agent(A).action_index("skip"),
                                  *toy.agent(B).action_index("set1")});

  Ecgm loop = make_self_loop_model();
  WindowSpace lspace(loop, 1);
  StrategyEnumerator only(lspace, 0, StrategyMode::Perfect);
  Assignment lchi{{std::make_shared<const Strategy>(only.at(0))}, 1};
  CHECK(composed_action(lchi, 0) == std::vector<int>{0});
}

TEST_CASE("override replaces one slot and leaves the original alone") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 1);
  AgentId A = *toy.agent_index("A");
  AgentId B = *toy.agent_index("B");

  Assignment chi;
  chi.recall = 1;
  chi.by_agent.resize(2);
  chi.by_agent[A] = positional(toy, space, A, {});
  chi.by_agent[B] = positional(toy, space, B, {});

  StrategyPtr fB = positional(toy, space, B, {{"(0,lam)", "set1"}});
  StrategyPtr fB2 = positional(toy, space, B, {{"(1,lam)", "set1"}});

  Assignment next = override_strategy(chi, B, fB);
  CHECK(next.by_agent[A] == chi.by_agent[A]);
  CHECK(next.by_agent[B] == fB);
  CHECK(chi.by_agent[B] != fB);

  Assignment twice = override_strategy(override_strategy(chi, B, fB), B, fB2);
  CHECK(twice.by_agent[B] == fB2);
  CHECK(twice.by_agent[A] == chi.by_agent[A]);

  Strategy wrong;
  wrong.agent = B;
  wrong.recall = 2;
  CHECK_THROWS_AS(
      override_strategy(chi, B, std::make_shared<const Strategy>(wrong)),
      Error);
}

TEST_CASE("outcome runs fold into the expected cycles") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 1);
  AgentId A = *toy.agent_index("A");
  AgentId B = *toy.agent_index("B");

  Assignment chi;
  chi.recall = 1;
  chi.by_agent.resize(2);
  chi.by_agent[A] = positional(toy, space, A, {{"(eA,eB)", "set0"}});
  chi.by_agent[B] = positional(toy, space, B,
                               {{"(0,lam)", "set1"}, {"(1,lam)", "set0"}});

  LassoRun run = outcome_run(space, toy.initial(), chi);
  CHECK(run.prefix.empty());
  CHECK(names_of(toy, run.cycle) ==
        std::vector<std::string>{"(eA,eB)", "(0,lam)", "(0,1)"});

  chi.by_agent[A] = positional(toy, space, A, {{"(eA,eB)", "set1"}});
  chi.by_agent[B] = positional(toy, space, B,
                               {{"(0,lam)", "set1"}, {"(1,lam)", "set1"}});
  run = outcome_run(space, toy.initial(), chi);
  CHECK(run.prefix.empty());
  CHECK(names_of(toy, run.cycle) ==
        std::vector<std::string>{"(eA,eB)", "(1,lam)", "(1,1)"});

  Ecgm loop = make_self_loop_model();
  WindowSpace lspace(loop, 1);
  StrategyEnumerator only(lspace, 0, StrategyMode::Perfect);
  Assignment lchi{{std::make_shared<const Strategy>(only.at(0))}, 1};
  run = outcome_run(lspace, 0, lchi);
  CHECK(run.prefix.empty());
  CHECK(run.cycle == std::vector<StateId>{0});
}

TEST_CASE("lasso bound and threefold expansion replay") {
  eslmc::testing::Rng rng(424242);
  for (int round = 0; round < 60; ++round) {
    Ecgm model = round % 3 == 0 ? load_toy_model()
                                : eslmc::testing::random_small_model(rng);
    for (int recall : {1, 2}) {
      EvalConfig cfg;
      cfg.recall = recall;
      EvalSession session(model, cfg);
      Assignment chi = eslmc::testing::random_assignment(rng, session);
      for (StateId s = 0; s < model.state_count(); ++s) {
        LassoRun run = outcome_run(session.windows(), s, chi);
        CHECK(run.length() <=
              static_cast<std::size_t>(session.windows().count()));
        CHECK(!run.cycle.empty());
        CHECK(run.at(0) == s);

        // Re-derive every step of the threefold expansion.
        std::vector<StateId> window{s};
        for (std::size_t k = 0; k + 1 < 3 * run.length(); ++k) {
          int w = session.windows().index_of(window);
          REQUIRE(w >= 0);
          StateId next = model.step(run.at(k), composed_action(chi, w));
          CHECK(next == run.at(k + 1));
          window.push_back(next);
          if (static_cast<int>(window.size()) > recall)
            window.erase(window.begin());
        }
      }
    }
  }
}

TEST_CASE("embedding into one more step of recall preserves outcomes") {
  eslmc::testing::Rng rng(5150);
  for (int round = 0; round < 20; ++round) {
    Ecgm model = round % 2 == 0 ? load_toy_model()
                                : eslmc::testing::random_small_model(rng);
    WindowSpace w1(model, 1), w2(model, 2);
    EvalConfig cfg;
    cfg.recall = 1;
    EvalSession session(model, cfg);
    Assignment chi = eslmc::testing::random_assignment(rng, session);

    Assignment lifted;
    lifted.recall = 2;
    for (AgentId i = 0; i < model.agent_count(); ++i)
      lifted.by_agent.push_back(std::make_shared<const Strategy>(
          embed_strategy(w1, w2, *chi.by_agent[i])));

    for (StateId s = 0; s < model.state_count(); ++s) {
      LassoRun a = outcome_run(w1, s, chi);
      LassoRun b = outcome_run(w2, s, lifted);
      for (std::size_t k = 0; k < 3 * std::max(a.length(), b.length()); ++k)
        CHECK(a.at(k) == b.at(k));
    }
  }
}

TEST_CASE("witness serialization lists windows in canonical order") {
  Ecgm toy = load_toy_model();
  WindowSpace space(toy, 1);
  StrategyEnumerator en(space, *toy.agent_index("B"), StrategyMode::Perfect);
  auto lines = format_strategy(space, en.at(0));
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "(eA,eB) => wait");
  CHECK(lines[1] == "(0,lam) => set0");
}

#include <doctest.h>

#include "eslmc/qptl.hpp"
#include "support/generators.hpp"

using namespace eslmc;

TEST_CASE("valuation models have one boolean agent per proposition") {
  Ecgm one = build_valuation_model({"p"});
  CHECK(one.agent_count() == 1);
  CHECK(one.state_count() == 2);
  for (StateId s = 0; s < one.state_count(); ++s)
    CHECK(one.edges_from(s).size() == 2);

  Ecgm two = build_valuation_model({"p", "q"});
  CHECK(two.state_count() == 4);
  for (StateId s = 0; s < two.state_count(); ++s)
    CHECK(two.edges_from(s).size() == 4);

  // The emitted document passes full validation up to four propositions.
  for (int n = 1; n <= 4; ++n) {
    std::vector<std::string> props;
    for (int i = 0; i < n; ++i) props.push_back("p" + std::to_string(i));
    ValidationResult r = Ecgm::validate(valuation_model_document(props));
    REQUIRE(r.ok());
    CHECK(r.model->state_count() == (1 << n));
    CHECK(r.model->edge_pair_count() == (1 << n) * (1 << n));
    // All-false initial state; atom p_i holds exactly where its bit is t.
    CHECK(r.model->state_name(r.model->initial()).find('t') ==
          std::string::npos);
  }

  CHECK_THROWS_AS(build_valuation_model({}), Error);
  CHECK_THROWS_AS(build_valuation_model({"p", "p"}), Error);
}

TEST_CASE("translation maps atoms to next-state reads") {
  Ecgm model = build_valuation_model({"p"});
  QptlFormula q = parse_qptl("p", {"p"});
  Formula t = translate(q, model);
  REQUIRE(t.node().kind == NodeKind::Next);
  CHECK(t.node().lhs->kind == NodeKind::Atom);
  CHECK(t.node().lhs->atom == "p");

  QptlFormula ex = parse_qptl("exists p. (p & X !p)", {"p"});
  Formula te = translate(ex, model);
  Formula expected = parse_formula("exists x_p:p. (X p & X X !p)",
                                   Roster::of(model));
  CHECK(structurally_equal(te.node(), expected.node()));
}

TEST_CASE("QPTL parsing rejects what it should") {
  CHECK_THROWS_AS(parse_qptl("K p", {"p"}), ParseError);
  CHECK_THROWS_AS(parse_qptl("q", {"p"}), Error);
  CHECK_THROWS_AS(parse_qptl("exists q. q", {"p"}), Error);
  CHECK_THROWS_AS(parse_qptl("p &", {"p"}), Error);
}

TEST_CASE("alternation depth survives translation") {
  Ecgm model = build_valuation_model({"p", "q"});
  eslmc::testing::Rng rng(60601);
  for (int i = 0; i < 300; ++i) {
    QptlPtr f = eslmc::testing::random_qptl_formula(rng, {"p", "q"}, 5);
    QptlFormula qf{f, {"p", "q"}};
    Formula t = translate(qf, model);
    CHECK(alternation_depth(*f) == alternation_depth(t.node()));
  }
  // Spot values.
  QptlFormula a = parse_qptl("exists p. forall q. F (p & !q)", {"p", "q"});
  CHECK(alternation_depth(*a.root) == 1);
  CHECK(alternation_depth(translate(a, model).node()) == 1);
  QptlFormula b = parse_qptl("forall p. F p", {"p", "q"});
  CHECK(alternation_depth(*b.root) == 0);
}

TEST_CASE("satisfiability of the flagship examples") {
  EvalConfig cfg;

  QptlSatResult sat = qptl_sat(parse_qptl("exists p. (p & X !p)", {"p"}), cfg);
  CHECK(sat.status == QptlStatus::Sat);
  REQUIRE(sat.evaluation.has_value());
  REQUIRE(sat.verified.has_value());
  CHECK(*sat.verified);
  // The reported evaluation starts t, f as required.
  const auto& word = sat.evaluation->words.at("p");
  CHECK(word.at(0) == true);
  CHECK(word.at(1) == false);

  QptlSatResult unsat = qptl_sat(parse_qptl("exists p. (p & !p)", {"p"}), cfg);
  CHECK(unsat.status == QptlStatus::Unsat);
  CHECK(!unsat.evaluation.has_value());

  QptlSatResult never = qptl_sat(parse_qptl("exists p. G !p", {"p"}), cfg);
  CHECK(never.status == QptlStatus::Sat);
  REQUIRE(never.verified.has_value());
  CHECK(*never.verified);
}

TEST_CASE("the bounded oracle agrees with hand results") {
  QptlOracleResult a =
      qptl_oracle(parse_qptl("exists p. (p & X !p)", {"p"}), 2, 2);
  CHECK(a.status == QptlStatus::Sat);
  REQUIRE(a.evaluation.has_value());
  CHECK(a.evaluation->words.at("p").at(0) == true);
  CHECK(a.evaluation->words.at("p").at(1) == false);
  CHECK(qptl_eval_word(*parse_qptl("p & X !p", {"p"}).root, *a.evaluation));

  QptlOracleResult b =
      qptl_oracle(parse_qptl("exists p. (p & !p)", {"p"}), 4, 4);
  CHECK(b.status == QptlStatus::Unsat);

  QptlOracleResult c = qptl_oracle(
      parse_qptl("exists p. exists q. (p & !q & X (q & !p))", {"p", "q"}), 2,
      2);
  CHECK(c.status == QptlStatus::Sat);

  // Free propositions are closed existentially.
  QptlOracleResult d = qptl_oracle(parse_qptl("p & X !p", {"p"}), 2, 2);
  CHECK(d.status == QptlStatus::Sat);

  CHECK_THROWS_AS(qptl_oracle(parse_qptl("p", {"p"}), 0, 2), Error);
  CHECK_THROWS_AS(
      qptl_oracle(parse_qptl("F exists p. p", {"p"}), 2, 2), Error);
}

TEST_CASE("direct word evaluation handles the temporal operators") {
  PeriodicEvaluation eval;
  eval.words["p"] = {{true, false}, {false}};   // t f then f forever
  eval.words["q"] = {{}, {false, true}};        // f t f t ...

  auto check = [&](const char* text, bool expected) {
    QptlFormula f = parse_qptl(text, {"p", "q"});
    CHECK(qptl_eval_word(*f.root, eval) == expected);
  };
  check("p", true);
  check("X p", false);
  check("F q", true);
  check("G !p | p", true);
  check("p U q", true);       // q holds at position 1, p at position 0
  check("q U p", true);       // p holds immediately
  check("X (p U q)", true);
  check("G q", false);
  check("F (q & X q)", false);  // q alternates forever
}

TEST_CASE("induced evaluations replay for prenex corpus shapes") {
  EvalConfig cfg;
  cfg.recall = 2;
  for (const char* text :
       {"exists p. (p & X X p)", "exists p. F p", "exists p. (p U !p)",
        "exists p. (!p & X p & X X !p)",
        "exists p. exists q. ((p U q) & !q & X q)"}) {
    QptlFormula f = parse_qptl(text, {"p", "q"});
    QptlSatResult r = qptl_sat(f, cfg);
    REQUIRE(r.status == QptlStatus::Sat);
    REQUIRE(r.verified.has_value());
    CHECK(*r.verified);
  }
}

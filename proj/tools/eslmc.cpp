// eslmc: model checker for epistemic strategy logic over concurrent game
// models, with a QPTL satisfiability frontend.
//
// Exit codes: 0 = true/sat, 1 = false/unsat, 2 = usage or validation error,
// 3 = strategy-space cap exceeded.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eslmc/checker.hpp"
#include "eslmc/evaluator.hpp"
#include "eslmc/formula.hpp"
#include "eslmc/model.hpp"
#include "eslmc/qptl.hpp"

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;

std::uint64_t default_cap() {
  if (const char* env = std::getenv("ESLMC_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
    std::cerr << "warning: ignoring malformed ESLMC_CAP '" << env << "'\n";
  }
  return 10'000'000;
}

struct CommonOpts {
  int recall = 1;
  std::string mode = "perfect";
  std::string format = "text";
  std::uint64_t cap = default_cap();
  int jobs = 1;

  void attach(CLI::App& cmd, bool with_recall = true) {
    if (with_recall)
      cmd.add_option("--recall", recall, "strategy recall (1 = positional)")
          ->check(CLI::Range(1, 16));
    cmd.add_option("--mode", mode, "strategy mode")
        ->check(CLI::IsMember({"perfect", "uniform"}));
    cmd.add_option("--format", format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    cmd.add_option("--cap", cap, "max enumerable strategies per quantifier");
    cmd.add_option("--jobs", jobs, "worker threads for the top-level search")
        ->check(CLI::Range(1, 256));
  }

  eslmc::EvalConfig config() const {
    eslmc::EvalConfig cfg;
    cfg.recall = recall;
    cfg.mode = mode == "uniform" ? eslmc::StrategyMode::Uniform
                                 : eslmc::StrategyMode::Perfect;
    cfg.cap = cap;
    cfg.jobs = jobs;
    return cfg;
  }
};

eslmc::Ecgm load_model_or_exit(const std::string& path) {
  eslmc::ValidationResult r = eslmc::Ecgm::validate_file(path);
  for (const auto& w : r.warnings)
    std::cerr << eslmc::to_string(w) << "\n";
  if (!r.ok()) {
    for (const auto& e : r.errors)
      std::cerr << eslmc::to_string(e) << "\n";
    std::exit(kExitUsage);
  }
  return std::move(*r.model);
}

std::string read_file_or_exit(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    std::exit(kExitUsage);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
    text.pop_back();
  return text;
}

int run_check(const std::string& model_path, const std::string& formula_text,
              const CommonOpts& opts, const std::string& closure,
              bool witness) {
  eslmc::Ecgm model = load_model_or_exit(model_path);
  eslmc::Formula f =
      eslmc::parse_formula(formula_text, eslmc::Roster::of(model));
  eslmc::ClosureMode mode = closure == "universal"
                                ? eslmc::ClosureMode::Universal
                                : eslmc::ClosureMode::Existential;
  eslmc::Verdict verdict = eslmc::model_check(model, f, opts.config(), mode);
  if (!witness) verdict.witnesses.clear();
  eslmc::Report report = eslmc::make_report(model, formula_text, f,
                                            opts.config(), mode, verdict);
  if (opts.format == "json")
    std::cout << eslmc::to_json(report).dump(2) << "\n";
  else
    std::cout << eslmc::to_text(report);
  return report.verdict.result ? kExitTrue : kExitFalse;
}

int run_validate(const std::string& model_path, const std::string& format) {
  eslmc::ValidationResult r = eslmc::Ecgm::validate_file(model_path);
  if (format == "json") {
    nlohmann::ordered_json j;
    j["ok"] = r.ok();
    if (r.ok()) {
      j["agents"] = r.model->agent_count();
      j["reachable_states"] = r.model->state_count();
      j["edges"] = r.model->edge_pair_count();
    }
    auto render = [](const std::vector<eslmc::Diagnostic>& list) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& d : list) arr.push_back(eslmc::to_string(d));
      return arr;
    };
    j["errors"] = render(r.errors);
    j["warnings"] = render(r.warnings);
    std::cout << j.dump(2) << "\n";
    return r.ok() ? kExitTrue : kExitUsage;
  }
  for (const auto& w : r.warnings) std::cout << eslmc::to_string(w) << "\n";
  if (!r.ok()) {
    for (const auto& e : r.errors) std::cout << eslmc::to_string(e) << "\n";
    std::cout << "model is invalid (" << r.errors.size() << " errors)\n";
    return kExitUsage;
  }
  std::cout << r.model->agent_count() << " agents, "
            << r.model->state_count() << " reachable states, "
            << r.model->edge_pair_count() << " transitions\n";
  return kExitTrue;
}

int run_info(const std::string& model_path, const CommonOpts& opts) {
  eslmc::Ecgm model = load_model_or_exit(model_path);
  eslmc::WindowSpace space(model, opts.recall);

  if (opts.format == "json") {
    nlohmann::ordered_json j;
    j["model"] = {{"agents", model.agent_count()},
                  {"reachable_states", model.state_count()},
                  {"edges", model.edge_pair_count()}};
    j["recall"] = opts.recall;
    j["windows"] = space.count();
    auto states = nlohmann::ordered_json::array();
    for (eslmc::StateId s = 0; s < model.state_count(); ++s)
      states.push_back(model.state_name(s));
    j["reachable"] = std::move(states);
    nlohmann::ordered_json strategies = nlohmann::ordered_json::object();
    for (eslmc::AgentId i = 0; i < model.agent_count(); ++i) {
      strategies[model.agent(i).name] = {
          {"perfect",
           space.strategy_count(i, eslmc::StrategyMode::Perfect)},
          {"uniform",
           space.strategy_count(i, eslmc::StrategyMode::Uniform)}};
    }
    j["strategies"] = std::move(strategies);
    std::cout << j.dump(2) << "\n";
    return kExitTrue;
  }

  std::cout << model.agent_count() << " agents, " << model.state_count()
            << " reachable states, " << model.edge_pair_count()
            << " transitions\n";
  std::cout << "reachable states:";
  for (eslmc::StateId s = 0; s < model.state_count(); ++s)
    std::cout << " " << model.state_name(s);
  std::cout << "\n";
  std::cout << "windows at recall " << opts.recall << ": " << space.count()
            << "\n";
  for (eslmc::AgentId i = 0; i < model.agent_count(); ++i) {
    std::cout << "agent " << model.agent(i).name << ": "
              << space.strategy_count(i, eslmc::StrategyMode::Perfect)
              << " strategies ("
              << space.strategy_count(i, eslmc::StrategyMode::Uniform)
              << " uniform) at recall " << opts.recall << "\n";
  }
  return kExitTrue;
}

int run_qptl_sat(const std::string& formula_text,
                 const std::string& props_csv, const CommonOpts& opts) {
  std::vector<std::string> props;
  std::stringstream ss(props_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) props.push_back(item);
  }
  eslmc::QptlFormula f = eslmc::parse_qptl(formula_text, props);
  eslmc::QptlSatResult r = eslmc::qptl_sat(f, opts.config());
  bool sat = r.status == eslmc::QptlStatus::Sat;

  if (opts.format == "json") {
    nlohmann::ordered_json j;
    j["formula"] = formula_text;
    j["props"] = props;
    j["config"] = {{"recall", opts.recall},
                   {"mode", opts.mode},
                   {"cap", opts.cap}};
    nlohmann::ordered_json v;
    v["status"] = sat ? "sat" : "unsat-at-recall";
    v["recall"] = r.recall;
    if (r.evaluation) {
      nlohmann::ordered_json words = nlohmann::ordered_json::object();
      for (const auto& [prop, word] : r.evaluation->words)
        words[prop] = {{"prefix", word.prefix}, {"cycle", word.cycle}};
      v["evaluation"] = std::move(words);
    }
    if (r.verified) v["verified"] = *r.verified;
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (const auto& entry : r.witnesses)
      w[entry.var] = {{"agent", entry.agent}, {"table", entry.table}};
    v["witnesses"] = std::move(w);
    v["stats"] = {{"states_explored", r.stats.states_explored},
                  {"candidates", r.stats.candidates_total},
                  {"candidates_examined", r.stats.candidates_examined}};
    j["verdict"] = std::move(v);
    std::cout << j.dump(2) << "\n";
    return sat ? kExitTrue : kExitFalse;
  }

  if (sat) {
    std::cout << "SAT (recall " << r.recall << ")\n";
    if (r.evaluation) std::cout << eslmc::to_string(*r.evaluation);
    if (r.verified)
      std::cout << "witness replay: "
                << (*r.verified ? "confirmed" : "NOT confirmed") << "\n";
    for (const auto& w : r.witnesses) {
      std::cout << "witness " << w.var << ":" << w.agent << "\n";
      for (const auto& line : w.table) std::cout << "  " << line << "\n";
    }
  } else {
    std::cout << "UNSAT at recall " << r.recall
              << " (no recall-" << r.recall << " strategy witnesses it)\n";
  }
  return sat ? kExitTrue : kExitFalse;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eslmc: epistemic strategy logic model checker"};
  app.require_subcommand(1);

  // check
  auto* check = app.add_subcommand("check", "model-check a formula");
  std::string model_path, formula_text, formula_file;
  std::string closure = "existential";
  bool witness = false;
  CommonOpts check_opts;
  check->add_option("--model", model_path, "model file")->required();
  auto* opt_formula = check->add_option("--formula", formula_text, "formula");
  auto* opt_file =
      check->add_option("--formula-file", formula_file, "formula file");
  opt_formula->excludes(opt_file);
  check->add_option("--closure", closure, "quantify free variables")
      ->check(CLI::IsMember({"existential", "universal"}));
  check->add_flag("--witness", witness, "print witness strategies");
  check_opts.attach(*check);

  // validate
  auto* validate = app.add_subcommand("validate", "validate a model file");
  std::string v_model, v_format = "text";
  validate->add_option("--model", v_model, "model file")->required();
  validate->add_option("--format", v_format, "report format")
      ->check(CLI::IsMember({"text", "json"}));

  // info
  auto* info = app.add_subcommand(
      "info", "reachable states and per-agent strategy counts");
  std::string i_model;
  CommonOpts info_opts;
  info->add_option("--model", i_model, "model file")->required();
  info_opts.attach(*info);

  // qptl-sat
  auto* qptl = app.add_subcommand(
      "qptl-sat", "decide QPTL satisfiability via the reduction");
  std::string q_formula, q_props;
  CommonOpts qptl_opts;
  qptl->add_option("--formula", q_formula, "QPTL formula")->required();
  qptl->add_option("--props", q_props, "comma-separated propositions")
      ->required();
  qptl_opts.attach(*qptl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (check->parsed()) {
      if (formula_text.empty() && formula_file.empty()) {
        std::cerr << "error: need --formula or --formula-file\n";
        return kExitUsage;
      }
      if (!formula_file.empty()) formula_text = read_file_or_exit(formula_file);
      return run_check(model_path, formula_text, check_opts, closure, witness);
    }
    if (validate->parsed()) return run_validate(v_model, v_format);
    if (info->parsed()) return run_info(i_model, info_opts);
    if (qptl->parsed()) return run_qptl_sat(q_formula, q_props, qptl_opts);
  } catch (const eslmc::SearchSpaceExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const eslmc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

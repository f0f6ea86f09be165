#include "eslmc/qptl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace eslmc {

namespace {

QptlPtr makeq(QKind kind) {
  auto n = std::make_shared<QptlNode>();
  n->kind = kind;
  return n;
}

QptlNode& mutq(QptlPtr& p) { return const_cast<QptlNode&>(*p); }

}  // namespace

QptlPtr mkq_atom(std::string prop) {
  auto p = makeq(QKind::Atom);
  mutq(p).prop = std::move(prop);
  return p;
}
QptlPtr mkq_not(QptlPtr f) {
  auto p = makeq(QKind::Not);
  mutq(p).lhs = std::move(f);
  return p;
}
QptlPtr mkq_implies(QptlPtr l, QptlPtr r) {
  auto p = makeq(QKind::Implies);
  mutq(p).lhs = std::move(l);
  mutq(p).rhs = std::move(r);
  return p;
}
QptlPtr mkq_next(QptlPtr f) {
  auto p = makeq(QKind::Next);
  mutq(p).lhs = std::move(f);
  return p;
}
QptlPtr mkq_until(QptlPtr l, QptlPtr r) {
  auto p = makeq(QKind::Until);
  mutq(p).lhs = std::move(l);
  mutq(p).rhs = std::move(r);
  return p;
}
QptlPtr mkq_eventually(QptlPtr f) {
  auto p = makeq(QKind::Eventually);
  mutq(p).lhs = std::move(f);
  return p;
}
QptlPtr mkq_exists(std::string prop, QptlPtr f) {
  auto p = makeq(QKind::ExistsProp);
  mutq(p).prop = std::move(prop);
  mutq(p).lhs = std::move(f);
  return p;
}

// ---------------------------------------------------------------------------
// Parser (ESL surface syntax minus K; "exists p." binds a proposition)
// ---------------------------------------------------------------------------

namespace {

class QptlParser {
 public:
  QptlParser(std::string_view src, const std::vector<std::string>& props)
      : src_(src), props_(props) {}

  QptlPtr parse() {
    skip();
    QptlPtr f = formula();
    skip();
    if (pos_ != src_.size())
      throw ParseError(pos_, "trailing input");
    return f;
  }

 private:
  void skip() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool eat_word(std::string_view w) {
    skip();
    if (src_.substr(pos_).starts_with(w)) {
      std::size_t end = pos_ + w.size();
      if (end == src_.size() ||
          (!std::isalnum(static_cast<unsigned char>(src_[end])) &&
           src_[end] != '_')) {
        pos_ = end;
        return true;
      }
    }
    return false;
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) throw ParseError(pos_, "expected an identifier");
    return std::string(src_.substr(start, pos_ - start));
  }

  void check_prop(const std::string& p, std::size_t at) {
    if (std::find(props_.begin(), props_.end(), p) == props_.end())
      throw Error(ErrorKind::UnknownProposition,
                  "at offset " + std::to_string(at) +
                      ": proposition '" + p + "' is not declared");
  }

  QptlPtr truth() {
    if (props_.empty())
      throw Error(ErrorKind::EmptyAP,
                  "true/false need at least one declared proposition");
    return mkq_implies(mkq_atom(props_[0]), mkq_atom(props_[0]));
  }

  QptlPtr quant() {
    bool is_forall = eat_word("forall");
    if (!is_forall && !eat_word("exists"))
      throw ParseError(pos_, "expected a quantifier");
    std::size_t at = pos_;
    std::string p = ident();
    check_prop(p, at);
    if (!eat('.')) throw ParseError(pos_, "expected '.'");
    QptlPtr body = formula();
    if (is_forall)
      return mkq_not(mkq_exists(std::move(p), mkq_not(std::move(body))));
    return mkq_exists(std::move(p), std::move(body));
  }

  bool at_quant() {
    std::size_t save = pos_;
    bool yes = eat_word("exists") || eat_word("forall");
    pos_ = save;
    return yes;
  }

  QptlPtr formula() {
    if (at_quant()) return quant();
    return implies();
  }

  QptlPtr implies() {
    QptlPtr l = disjunction();
    skip();
    if (src_.substr(pos_).starts_with("->")) {
      pos_ += 2;
      return mkq_implies(std::move(l), formula());
    }
    return l;
  }

  QptlPtr disjunction() {
    QptlPtr l = conjunction();
    while (eat('|'))
      l = mkq_implies(mkq_not(std::move(l)), conjunction());
    return l;
  }

  QptlPtr conjunction() {
    QptlPtr l = until();
    while (true) {
      skip();
      if (pos_ < src_.size() && src_[pos_] == '&') {
        ++pos_;
        l = mkq_not(mkq_implies(std::move(l), mkq_not(until())));
      } else {
        return l;
      }
    }
  }

  QptlPtr until() {
    QptlPtr l = unary();
    if (eat_word("U")) return mkq_until(std::move(l), until());
    return l;
  }

  QptlPtr unary() {
    skip();
    if (eat('!')) return mkq_not(unary());
    if (eat_word("X")) return mkq_next(unary());
    if (eat_word("F")) return mkq_eventually(unary());
    if (eat_word("G")) return mkq_not(mkq_eventually(mkq_not(unary())));
    if (eat_word("K"))
      throw ParseError(pos_, "knowledge operators are not part of QPTL");
    if (at_quant()) return quant();
    return atom();
  }

  QptlPtr atom() {
    skip();
    if (eat_word("true")) return truth();
    if (eat_word("false")) return mkq_not(truth());
    if (eat('(')) {
      QptlPtr f = formula();
      if (!eat(')')) throw ParseError(pos_, "expected ')'");
      return f;
    }
    std::size_t at = pos_;
    std::string p = ident();
    check_prop(p, at);
    return mkq_atom(std::move(p));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& props_;
};

}  // namespace

QptlFormula parse_qptl(std::string_view text, std::vector<std::string> props) {
  QptlParser parser(text, props);
  return QptlFormula{parser.parse(), std::move(props)};
}

// ---------------------------------------------------------------------------
// Analysis and translation
// ---------------------------------------------------------------------------

namespace {

int qalt_walk(const QptlNode& f, bool negated, int last_kind, int switches) {
  switch (f.kind) {
    case QKind::Atom:
      return switches;
    case QKind::Not:
      return qalt_walk(*f.lhs, !negated, last_kind, switches);
    case QKind::Implies:
      return std::max(qalt_walk(*f.lhs, !negated, last_kind, switches),
                      qalt_walk(*f.rhs, negated, last_kind, switches));
    case QKind::Next:
    case QKind::Eventually:
      return qalt_walk(*f.lhs, negated, last_kind, switches);
    case QKind::Until:
      return std::max(qalt_walk(*f.lhs, negated, last_kind, switches),
                      qalt_walk(*f.rhs, negated, last_kind, switches));
    case QKind::ExistsProp: {
      int kind = negated ? 2 : 1;
      int next = switches + (last_kind != 0 && last_kind != kind ? 1 : 0);
      return qalt_walk(*f.lhs, negated, kind, next);
    }
  }
  return switches;
}

}  // namespace

int alternation_depth(const QptlNode& f) { return qalt_walk(f, false, 0, 0); }

nlohmann::json valuation_model_document(
    const std::vector<std::string>& props) {
  if (props.empty())
    throw Error(ErrorKind::EmptyAP, "the proposition list is empty");
  if (props.size() > 8)
    throw Error(ErrorKind::BadModel,
                "valuation models are capped at 8 propositions");
  std::set<std::string> dedup(props.begin(), props.end());
  if (dedup.size() != props.size())
    throw Error(ErrorKind::BadModel, "duplicate proposition");

  const std::size_t n = props.size();
  nlohmann::json doc;
  doc["agents"] = nlohmann::json::array();
  for (const auto& p : props) {
    doc["agents"].push_back(
        {{"name", p},
         {"locals", {"f", "t"}},
         {"actions", {"f", "t"}},
         {"protocol", {{"f", {"f", "t"}}, {"t", {"f", "t"}}}}});
  }
  doc["initial"] = std::vector<std::string>(n, "f");

  auto combo = [&](std::uint32_t bits) {
    std::vector<std::string> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = (bits >> i) & 1 ? "t" : "f";
    return v;
  };

  doc["transitions"] = nlohmann::json::array();
  for (std::uint32_t s = 0; s < (1u << n); ++s)
    for (std::uint32_t a = 0; a < (1u << n); ++a)
      doc["transitions"].push_back(
          {{"from", combo(s)}, {"action", combo(a)}, {"to", combo(a)}});

  doc["atoms"] = nlohmann::json::object();
  for (std::size_t i = 0; i < n; ++i) {
    auto states = nlohmann::json::array();
    for (std::uint32_t s = 0; s < (1u << n); ++s)
      if ((s >> i) & 1) states.push_back(combo(s));
    doc["atoms"][props[i]] = std::move(states);
  }
  return doc;
}

Ecgm build_valuation_model(const std::vector<std::string>& props) {
  ValidationResult r = Ecgm::validate(valuation_model_document(props));
  if (!r.ok())
    throw Error(ErrorKind::BadModel, "valuation model failed validation: " +
                                         to_string(r.errors.front()));
  return std::move(*r.model);
}

namespace {

FormulaPtr translate_node(const QptlNode& f, const Roster& roster) {
  switch (f.kind) {
    case QKind::Atom: {
      if (!roster.index_of(f.prop))
        throw Error(ErrorKind::UnknownProposition,
                    "proposition '" + f.prop + "' has no agent");
      return mk_next(mk_atom(f.prop), roster);
    }
    case QKind::Not:
      return mk_not(translate_node(*f.lhs, roster));
    case QKind::Implies:
      return mk_implies(translate_node(*f.lhs, roster),
                        translate_node(*f.rhs, roster));
    case QKind::Next:
      return mk_next(translate_node(*f.lhs, roster), roster);
    case QKind::Until:
      return mk_until(translate_node(*f.lhs, roster),
                      translate_node(*f.rhs, roster), roster);
    case QKind::Eventually:
      return mk_eventually(translate_node(*f.lhs, roster), roster);
    case QKind::ExistsProp: {
      auto agent = roster.index_of(f.prop);
      if (!agent)
        throw Error(ErrorKind::UnknownProposition,
                    "proposition '" + f.prop + "' has no agent");
      return mk_exists("x_" + f.prop, *agent, translate_node(*f.lhs, roster));
    }
  }
  throw Error(ErrorKind::BadModel, "unreachable");
}

}  // namespace

Formula translate(const QptlFormula& f, const Ecgm& valuation_model) {
  auto roster = std::make_shared<const Roster>(Roster::of(valuation_model));
  FormulaPtr root = translate_node(*f.root, *roster);
  return Formula{std::move(root), std::move(roster)};
}

// ---------------------------------------------------------------------------
// Direct word evaluation and the bounded oracle
// ---------------------------------------------------------------------------

namespace {

int node_size(const QptlNode& f) {
  int n = 1;
  if (f.lhs) n += node_size(*f.lhs);
  if (f.rhs) n += node_size(*f.rhs);
  return n;
}

struct WordEval {
  const PeriodicEvaluation& eval;
  std::size_t scan_limit;

  bool at(const QptlNode& f, std::size_t k) const {
    switch (f.kind) {
      case QKind::Atom: {
        auto it = eval.words.find(f.prop);
        if (it == eval.words.end())
          throw Error(ErrorKind::UnknownProposition,
                      "no evaluation for proposition '" + f.prop + "'");
        return it->second.at(k);
      }
      case QKind::Not:
        return !at(*f.lhs, k);
      case QKind::Implies:
        return !at(*f.lhs, k) || at(*f.rhs, k);
      case QKind::Next:
        return at(*f.lhs, k + 1);
      case QKind::Until:
        // All words are ultimately periodic, so a least witness (if any)
        // occurs within one period past the common stabilization point.
        for (std::size_t j = k; j <= k + scan_limit; ++j) {
          if (at(*f.rhs, j)) return true;
          if (!at(*f.lhs, j)) return false;
        }
        return false;
      case QKind::Eventually:
        for (std::size_t j = k; j <= k + scan_limit; ++j)
          if (at(*f.lhs, j)) return true;
        return false;
      case QKind::ExistsProp:
        throw Error(ErrorKind::UnsupportedShape,
                    "quantifier under a temporal operator");
    }
    return false;
  }
};

std::size_t scan_limit_for(const PeriodicEvaluation& eval, int size) {
  std::size_t max_prefix = 0;
  std::size_t period = 1;
  for (const auto& [_, word] : eval.words) {
    max_prefix = std::max(max_prefix, word.prefix.size());
    period = std::lcm(period, word.cycle.size());
  }
  return max_prefix + 2 * period + static_cast<std::size_t>(size) + 2;
}

}  // namespace

bool qptl_eval_word(const QptlNode& f, const PeriodicEvaluation& eval) {
  WordEval w{eval, scan_limit_for(eval, node_size(f))};
  return w.at(f, 0);
}

namespace {

// Quantifier layer of the oracle: boolean structure over quantifiers is fine,
// temporal content must be quantifier-free (checked by qptl_eval_word).
struct OracleSearch {
  int prefix_bound;
  int period_bound;
  PeriodicEvaluation env;

  bool eval(const QptlNode& f) {
    switch (f.kind) {
      case QKind::Not:
        return !eval(*f.lhs);
      case QKind::Implies:
        return !eval(*f.lhs) || eval(*f.rhs);
      case QKind::ExistsProp:
        return search(f.prop, *f.lhs);
      default:
        return qptl_eval_word(f, env);
    }
  }

  bool search(const std::string& prop, const QptlNode& body) {
    for (int plen = 0; plen <= prefix_bound; ++plen) {
      for (int clen = 1; clen <= period_bound; ++clen) {
        const int bits = plen + clen;
        for (std::uint32_t v = 0; v < (1u << bits); ++v) {
          PeriodicEvaluation::Word w;
          for (int i = 0; i < plen; ++i) w.prefix.push_back((v >> i) & 1);
          for (int i = 0; i < clen; ++i)
            w.cycle.push_back((v >> (plen + i)) & 1);
          auto saved = env.words.find(prop) != env.words.end()
                           ? std::optional(env.words[prop])
                           : std::nullopt;
          env.words[prop] = std::move(w);
          bool ok = eval(body);
          if (ok) return true;
          if (saved) env.words[prop] = *saved;
          else env.words.erase(prop);
        }
      }
    }
    return false;
  }
};

std::vector<std::string> free_props(const QptlNode& f,
                                    std::set<std::string>& bound,
                                    const std::vector<std::string>& order) {
  // Props appearing in atoms outside any quantifier for them, in AP order.
  std::set<std::string> found;
  std::function<void(const QptlNode&, std::set<std::string>)> walk =
      [&](const QptlNode& n, std::set<std::string> scope) {
        switch (n.kind) {
          case QKind::Atom:
            if (!scope.count(n.prop)) found.insert(n.prop);
            return;
          case QKind::ExistsProp: {
            bound.insert(n.prop);
            scope.insert(n.prop);
            walk(*n.lhs, std::move(scope));
            return;
          }
          default:
            if (n.lhs) walk(*n.lhs, scope);
            if (n.rhs) walk(*n.rhs, scope);
        }
      };
  walk(f, {});
  std::vector<std::string> out;
  for (const auto& p : order)
    if (found.count(p)) out.push_back(p);
  return out;
}

}  // namespace

QptlOracleResult qptl_oracle(const QptlFormula& f, int prefix_bound,
                             int period_bound) {
  if (prefix_bound < 1 || period_bound < 1)
    throw Error(ErrorKind::BoundsExceeded, "oracle bounds must be >= 1");

  // Satisfiability closes free propositions existentially.
  std::set<std::string> bound;
  QptlPtr closed = f.root;
  auto free = free_props(*f.root, bound, f.props);
  for (auto it = free.rbegin(); it != free.rend(); ++it)
    closed = mkq_exists(*it, std::move(closed));

  OracleSearch search{prefix_bound, period_bound, {}};
  QptlOracleResult result;
  result.prefix_bound = prefix_bound;
  result.period_bound = period_bound;
  if (search.eval(*closed)) {
    result.status = QptlStatus::Sat;
    result.evaluation = std::move(search.env);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Satisfiability through the ESL reduction
// ---------------------------------------------------------------------------

namespace {

bool is_prenex_exists(const QptlNode& f) {
  const QptlNode* n = &f;
  while (n->kind == QKind::ExistsProp) n = n->lhs.get();
  // Remainder must be quantifier-free.
  std::function<bool(const QptlNode&)> qfree = [&](const QptlNode& m) {
    if (m.kind == QKind::ExistsProp) return false;
    if (m.lhs && !qfree(*m.lhs)) return false;
    if (m.rhs && !qfree(*m.rhs)) return false;
    return true;
  };
  return qfree(*n);
}

const QptlNode& strip_leading_exists(const QptlNode& f) {
  const QptlNode* n = &f;
  while (n->kind == QKind::ExistsProp) n = n->lhs.get();
  return *n;
}

}  // namespace

QptlSatResult qptl_sat(const QptlFormula& f, const EvalConfig& cfg) {
  Ecgm model = build_valuation_model(f.props);
  Formula esl = translate(f, model);

  QptlSatResult result;
  result.recall = cfg.recall;

  Verdict verdict = model_check_with_leading_witnesses(model, esl, cfg);
  result.stats = verdict.stats;
  result.status = verdict.result ? QptlStatus::Sat : QptlStatus::Unsat;
  if (!verdict.result) return result;

  result.witnesses = verdict.witnesses;

  // Induced evaluation: run the witness assignment (defaults elsewhere) from
  // the initial state; proposition p at time n is p's component of the run
  // at n+1, i.e. exactly the action p took at time n.
  EvalSession session(model, cfg);
  Assignment chi = session.default_assignment();
  for (const auto& w : verdict.witnesses) {
    auto agent = model.agent_index(w.agent);
    chi.by_agent[*agent] = w.strategy;
  }
  LassoRun run = outcome_run(session.windows(), model.initial(), chi);

  PeriodicEvaluation eval;
  for (AgentId i = 0; i < model.agent_count(); ++i) {
    const int t_local = *model.agent(i).local_index("t");
    auto value = [&](StateId s) {
      return model.state(s).locals[i] == t_local;
    };
    PeriodicEvaluation::Word word;
    if (run.prefix.empty()) {
      // The shifted word is the cycle rotated left by one.
      const auto& c = run.cycle;
      for (std::size_t k = 0; k < c.size(); ++k)
        word.cycle.push_back(value(c[(k + 1) % c.size()]));
    } else {
      for (std::size_t k = 1; k < run.prefix.size(); ++k)
        word.prefix.push_back(value(run.prefix[k]));
      for (StateId s : run.cycle) word.cycle.push_back(value(s));
    }
    eval.words[model.agent(i).name] = std::move(word);
  }
  result.evaluation = std::move(eval);

  if (is_prenex_exists(*f.root)) {
    result.verified =
        qptl_eval_word(strip_leading_exists(*f.root), *result.evaluation);
  }
  return result;
}

std::string to_string(const PeriodicEvaluation& e) {
  std::ostringstream out;
  for (const auto& [prop, word] : e.words) {
    out << prop << ":";
    for (bool b : word.prefix) out << ' ' << (b ? 't' : 'f');
    out << " (";
    for (std::size_t i = 0; i < word.cycle.size(); ++i)
      out << (i ? " " : "") << (word.cycle[i] ? 't' : 'f');
    out << " ...)\n";
  }
  return out.str();
}

}  // namespace eslmc

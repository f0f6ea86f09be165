#include "eslmc/formula.hpp"

#include <atomic>
#include <cctype>

namespace eslmc {

namespace {

std::atomic<std::uint32_t> next_node_id{1};

// Atom used to spell the boolean constants: (tt -> tt) is true at every state
// under every interpretation, including models that declare no "tt" atom.
constexpr const char* kTruthAtom = "tt";

FormulaPtr make(NodeKind kind) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  return std::const_pointer_cast<const FormulaNode>(
      std::static_pointer_cast<FormulaNode>(n));
}

FormulaNode& mut(FormulaPtr& p) {
  return const_cast<FormulaNode&>(*p);
}

}  // namespace

Roster Roster::of(const Ecgm& m) {
  Roster r;
  for (AgentId i = 0; i < m.agent_count(); ++i)
    r.agents.push_back(m.agent(i).name);
  return r;
}

std::optional<AgentId> Roster::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i] == name) return static_cast<AgentId>(i);
  return std::nullopt;
}

FormulaPtr mk_atom(std::string name) {
  auto p = make(NodeKind::Atom);
  mut(p).atom = std::move(name);
  return p;
}

FormulaPtr mk_not(FormulaPtr f) {
  auto p = make(NodeKind::Not);
  mut(p).fr = f->fr;
  mut(p).lhs = std::move(f);
  return p;
}

FormulaPtr mk_implies(FormulaPtr l, FormulaPtr r) {
  auto p = make(NodeKind::Implies);
  mut(p).fr = l->fr | r->fr;
  mut(p).lhs = std::move(l);
  mut(p).rhs = std::move(r);
  return p;
}

FormulaPtr mk_next(FormulaPtr f, const Roster& roster) {
  auto p = make(NodeKind::Next);
  mut(p).fr = roster.all();
  mut(p).lhs = std::move(f);
  return p;
}

FormulaPtr mk_until(FormulaPtr l, FormulaPtr r, const Roster& roster) {
  auto p = make(NodeKind::Until);
  mut(p).fr = roster.all();
  mut(p).lhs = std::move(l);
  mut(p).rhs = std::move(r);
  return p;
}

FormulaPtr mk_know(AgentId agent, FormulaPtr f) {
  auto p = make(NodeKind::Know);
  mut(p).fr = f->fr;
  mut(p).agent = agent;
  mut(p).lhs = std::move(f);
  return p;
}

FormulaPtr mk_exists(std::string var, AgentId agent, FormulaPtr f) {
  auto p = make(NodeKind::Exists);
  mut(p).fr = f->fr & ~agent_bit(agent);
  mut(p).agent = agent;
  mut(p).var = std::move(var);
  mut(p).lhs = std::move(f);
  return p;
}

FormulaPtr mk_forall(std::string var, AgentId agent, FormulaPtr f) {
  auto p = make(NodeKind::Forall);
  mut(p).fr = f->fr & ~agent_bit(agent);
  mut(p).agent = agent;
  mut(p).var = std::move(var);
  mut(p).lhs = std::move(f);
  return p;
}

FormulaPtr mk_true() {
  return mk_implies(mk_atom(kTruthAtom), mk_atom(kTruthAtom));
}

FormulaPtr mk_false() { return mk_not(mk_true()); }

FormulaPtr mk_and(FormulaPtr l, FormulaPtr r) {
  return mk_not(mk_implies(std::move(l), mk_not(std::move(r))));
}

FormulaPtr mk_or(FormulaPtr l, FormulaPtr r) {
  return mk_implies(mk_not(std::move(l)), std::move(r));
}

FormulaPtr mk_eventually(FormulaPtr f, const Roster& roster) {
  return mk_until(mk_true(), std::move(f), roster);
}

FormulaPtr mk_globally(FormulaPtr f, const Roster& roster) {
  return mk_not(mk_until(mk_true(), mk_not(std::move(f)), roster));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum Type {
    Ident, KwExists, KwForall, KwTrue, KwFalse,
    OpNot, OpNext, OpFinally, OpGlobally, OpUntil, OpKnow,
    OpAnd, OpOr, OpImplies,
    LParen, RParen, LBracket, RBracket, Colon, Dot,
    End,
  };
  Type type;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::End, "", pos_};
      return;
    }
    char c = src_[pos_];
    auto sym = [&](Token::Type t, std::size_t len) {
      tok_ = {t, std::string(src_.substr(pos_, len)), pos_};
      pos_ += len;
    };
    switch (c) {
      case '!': return sym(Token::OpNot, 1);
      case '&': return sym(Token::OpAnd, 1);
      case '|': return sym(Token::OpOr, 1);
      case '(': return sym(Token::LParen, 1);
      case ')': return sym(Token::RParen, 1);
      case '[': return sym(Token::LBracket, 1);
      case ']': return sym(Token::RBracket, 1);
      case ':': return sym(Token::Colon, 1);
      case '.': return sym(Token::Dot, 1);
      case '-':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>')
          return sym(Token::OpImplies, 2);
        throw ParseError(pos_, "expected '->'");
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        ++pos_;
      std::string word(src_.substr(start, pos_ - start));
      Token::Type t = Token::Ident;
      if (word == "exists") t = Token::KwExists;
      else if (word == "forall") t = Token::KwForall;
      else if (word == "true") t = Token::KwTrue;
      else if (word == "false") t = Token::KwFalse;
      else if (word == "X") t = Token::OpNext;
      else if (word == "F") t = Token::OpFinally;
      else if (word == "G") t = Token::OpGlobally;
      else if (word == "U") t = Token::OpUntil;
      else if (word == "K") t = Token::OpKnow;
      tok_ = {t, std::move(word), start};
      return;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(std::string_view src, const Roster& roster)
      : lex_(src), roster_(roster) {}

  FormulaPtr parse() {
    FormulaPtr f = formula();
    const Token& t = lex_.peek();
    if (t.type != Token::End)
      throw ParseError(t.pos, "trailing input '" + t.text + "'");
    return f;
  }

 private:
  AgentId agent(const Token& t) {
    auto idx = roster_.index_of(t.text);
    if (!idx)
      throw Error(ErrorKind::UnknownAgent,
                  "at offset " + std::to_string(t.pos) + ": unknown agent '" +
                      t.text + "'");
    return *idx;
  }

  Token expect(Token::Type type, const char* what) {
    const Token& t = lex_.peek();
    if (t.type != type)
      throw ParseError(t.pos, std::string("expected ") + what);
    return lex_.take();
  }

  FormulaPtr quant() {
    Token kw = lex_.take();  // exists | forall
    Token var = expect(Token::Ident, "a variable name");
    expect(Token::Colon, "':'");
    Token ag = expect(Token::Ident, "an agent name");
    expect(Token::Dot, "'.'");
    FormulaPtr body = formula();
    return kw.type == Token::KwExists
               ? mk_exists(var.text, agent(ag), std::move(body))
               : mk_forall(var.text, agent(ag), std::move(body));
  }

  FormulaPtr formula() {
    auto t = lex_.peek().type;
    if (t == Token::KwExists || t == Token::KwForall) return quant();
    return implies();
  }

  FormulaPtr implies() {
    FormulaPtr l = disjunction();
    if (lex_.peek().type == Token::OpImplies) {
      lex_.take();
      return mk_implies(std::move(l), formula());
    }
    return l;
  }

  FormulaPtr disjunction() {
    FormulaPtr l = conjunction();
    while (lex_.peek().type == Token::OpOr) {
      lex_.take();
      l = mk_or(std::move(l), conjunction());
    }
    return l;
  }

  FormulaPtr conjunction() {
    FormulaPtr l = until();
    while (lex_.peek().type == Token::OpAnd) {
      lex_.take();
      l = mk_and(std::move(l), until());
    }
    return l;
  }

  FormulaPtr until() {
    FormulaPtr l = unary();
    if (lex_.peek().type == Token::OpUntil) {
      lex_.take();
      return mk_until(std::move(l), until(), roster_);
    }
    return l;
  }

  FormulaPtr unary() {
    const Token& t = lex_.peek();
    switch (t.type) {
      case Token::OpNot:
        lex_.take();
        return mk_not(unary());
      case Token::OpNext:
        lex_.take();
        return mk_next(unary(), roster_);
      case Token::OpFinally:
        lex_.take();
        return mk_eventually(unary(), roster_);
      case Token::OpGlobally:
        lex_.take();
        return mk_globally(unary(), roster_);
      case Token::OpKnow: {
        lex_.take();
        expect(Token::LBracket, "'['");
        Token ag = expect(Token::Ident, "an agent name");
        expect(Token::RBracket, "']'");
        return mk_know(agent(ag), unary());
      }
      case Token::KwExists:
      case Token::KwForall:
        return quant();
      default:
        return atom();
    }
  }

  FormulaPtr atom() {
    const Token& t = lex_.peek();
    switch (t.type) {
      case Token::KwTrue:
        lex_.take();
        return mk_true();
      case Token::KwFalse:
        lex_.take();
        return mk_false();
      case Token::Ident: {
        Token id = lex_.take();
        return mk_atom(id.text);
      }
      case Token::LParen: {
        lex_.take();
        FormulaPtr f = formula();
        expect(Token::RParen, "')'");
        return f;
      }
      default:
        throw ParseError(t.pos, "expected a formula");
    }
  }

  Lexer lex_;
  const Roster& roster_;
};

}  // namespace

Formula parse_formula(std::string_view text,
                      std::shared_ptr<const Roster> roster) {
  Parser p(text, *roster);
  return Formula{p.parse(), std::move(roster)};
}

Formula parse_formula(std::string_view text, const Roster& roster) {
  return parse_formula(text, std::make_shared<const Roster>(roster));
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

namespace {

int alt_walk(const FormulaNode& f, bool negated, int last_kind, int switches) {
  switch (f.kind) {
    case NodeKind::Atom:
      return switches;
    case NodeKind::Not:
      return alt_walk(*f.lhs, !negated, last_kind, switches);
    case NodeKind::Implies:
      return std::max(alt_walk(*f.lhs, !negated, last_kind, switches),
                      alt_walk(*f.rhs, negated, last_kind, switches));
    case NodeKind::Next:
    case NodeKind::Know:
      return alt_walk(*f.lhs, negated, last_kind, switches);
    case NodeKind::Until:
      return std::max(alt_walk(*f.lhs, negated, last_kind, switches),
                      alt_walk(*f.rhs, negated, last_kind, switches));
    case NodeKind::Exists:
    case NodeKind::Forall: {
      bool is_exists = (f.kind == NodeKind::Exists) != negated;
      int kind = is_exists ? 1 : 2;
      int next = switches + (last_kind != 0 && last_kind != kind ? 1 : 0);
      return alt_walk(*f.lhs, negated, kind, next);
    }
  }
  return switches;
}

}  // namespace

int alternation_depth(const FormulaNode& f) {
  return alt_walk(f, false, 0, 0);
}

QuantifierProfile profile(const Formula& f) {
  QuantifierProfile p;
  p.fr = f.node().fr;
  p.bnd = f.roster->all() & ~p.fr;
  p.alt = alternation_depth(f.node());
  p.is_sentence = p.fr == 0;
  return p;
}

namespace {

// Operand rendering: anything non-atomic is parenthesized, which keeps the
// printer trivially unambiguous.
void print(const FormulaNode& f, const Roster& roster, std::string& out);

void print_operand(const FormulaNode& f, const Roster& roster,
                   std::string& out) {
  if (f.kind == NodeKind::Atom) {
    out += f.atom;
    return;
  }
  out += '(';
  print(f, roster, out);
  out += ')';
}

void print(const FormulaNode& f, const Roster& roster, std::string& out) {
  switch (f.kind) {
    case NodeKind::Atom:
      out += f.atom;
      return;
    case NodeKind::Not:
      out += '!';
      print_operand(*f.lhs, roster, out);
      return;
    case NodeKind::Next:
      out += "X ";
      print_operand(*f.lhs, roster, out);
      return;
    case NodeKind::Know:
      out += "K[";
      out += roster.agents[f.agent];
      out += "] ";
      print_operand(*f.lhs, roster, out);
      return;
    case NodeKind::Implies:
      print_operand(*f.lhs, roster, out);
      out += " -> ";
      print_operand(*f.rhs, roster, out);
      return;
    case NodeKind::Until:
      print_operand(*f.lhs, roster, out);
      out += " U ";
      print_operand(*f.rhs, roster, out);
      return;
    case NodeKind::Exists:
    case NodeKind::Forall:
      out += f.kind == NodeKind::Exists ? "exists " : "forall ";
      out += f.var;
      out += ':';
      out += roster.agents[f.agent];
      out += ". ";
      print(*f.lhs, roster, out);
      return;
  }
}

}  // namespace

std::string to_string(const FormulaNode& f, const Roster& roster) {
  std::string out;
  print(f, roster, out);
  return out;
}

std::string to_string(const Formula& f) {
  return to_string(f.node(), *f.roster);
}

bool structurally_equal(const FormulaNode& a, const FormulaNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Atom:
      return a.atom == b.atom;
    case NodeKind::Not:
    case NodeKind::Next:
      return structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::Know:
      return a.agent == b.agent && structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::Implies:
    case NodeKind::Until:
      return structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
    case NodeKind::Exists:
    case NodeKind::Forall:
      return a.agent == b.agent && a.var == b.var &&
             structurally_equal(*a.lhs, *b.lhs);
  }
  return false;
}

std::vector<std::string> agent_names(const Roster& r, AgentSet set) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < r.agents.size(); ++i)
    if (set & agent_bit(static_cast<AgentId>(i))) out.push_back(r.agents[i]);
  return out;
}

}  // namespace eslmc

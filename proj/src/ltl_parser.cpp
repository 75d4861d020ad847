#include "hiersynth/ltl.hpp"

#include <algorithm>
#include <cctype>

namespace hiersynth {

LtlPtr ltl_true() { return std::make_shared<const LtlFormula>(LtlFormula{LtlOp::constant_true, {}, {}, {}}); }
LtlPtr ltl_false() { return std::make_shared<const LtlFormula>(LtlFormula{LtlOp::constant_false, {}, {}, {}}); }
LtlPtr ltl_atom(std::string name) {
  return std::make_shared<const LtlFormula>(LtlFormula{LtlOp::atom, std::move(name), {}, {}});
}

LtlPtr ltl_unary(LtlOp op, LtlPtr operand) {
  if (op != LtlOp::negation && op != LtlOp::next && op != LtlOp::eventually && op != LtlOp::always)
    throw std::invalid_argument("ltl_unary: not a unary operator");
  return std::make_shared<const LtlFormula>(LtlFormula{op, {}, std::move(operand), {}});
}

LtlPtr ltl_binary(LtlOp op, LtlPtr lhs, LtlPtr rhs) {
  if (op != LtlOp::conjunction && op != LtlOp::disjunction && op != LtlOp::implication && op != LtlOp::until &&
      op != LtlOp::release)
    throw std::invalid_argument("ltl_binary: not a binary operator");
  return std::make_shared<const LtlFormula>(LtlFormula{op, {}, std::move(lhs), std::move(rhs)});
}

bool structurally_equal(const LtlFormula& a, const LtlFormula& b) {
  if (a.op != b.op || a.atom != b.atom) return false;
  if (bool(a.lhs) != bool(b.lhs) || bool(a.rhs) != bool(b.rhs)) return false;
  if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
  return !a.rhs || structurally_equal(*a.rhs, *b.rhs);
}

std::size_t formula_size(const LtlFormula& f) {
  return 1 + (f.lhs ? formula_size(*f.lhs) : 0) + (f.rhs ? formula_size(*f.rhs) : 0);
}

std::string to_string(const LtlFormula& f) {
  switch (f.op) {
    case LtlOp::constant_true: return "true";
    case LtlOp::constant_false: return "false";
    case LtlOp::atom: return f.atom;
    case LtlOp::negation: return "!" + to_string(*f.lhs);
    case LtlOp::next: return "X " + to_string(*f.lhs);
    case LtlOp::eventually: return "F " + to_string(*f.lhs);
    case LtlOp::always: return "G " + to_string(*f.lhs);
    case LtlOp::conjunction: return "(" + to_string(*f.lhs) + " && " + to_string(*f.rhs) + ")";
    case LtlOp::disjunction: return "(" + to_string(*f.lhs) + " || " + to_string(*f.rhs) + ")";
    case LtlOp::implication: return "(" + to_string(*f.lhs) + " -> " + to_string(*f.rhs) + ")";
    case LtlOp::until: return "(" + to_string(*f.lhs) + " U " + to_string(*f.rhs) + ")";
    case LtlOp::release: return "(" + to_string(*f.lhs) + " R " + to_string(*f.rhs) + ")";
  }
  return {};
}

LtlParseError::LtlParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}

namespace {

struct Token {
  enum Kind { identifier, symbol, end } kind;
  std::string text;
  std::size_t position;
};

std::vector<Token> tokenize(const std::string& text) {
  static const std::vector<std::string> symbols{"&&", "||", "->", "<>", "[]", "!", "(", ")"};
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      tokens.push_back({Token::identifier, text.substr(i, j - i), i});
      i = j;
      continue;
    }
    const auto sym = std::find_if(symbols.begin(), symbols.end(),
                                  [&](const std::string& s) { return text.compare(i, s.size(), s) == 0; });
    if (sym == symbols.end()) throw LtlParseError(std::string("unexpected character '") + text[i] + "'", i);
    tokens.push_back({Token::symbol, *sym, i});
    i += sym->size();
  }
  tokens.push_back({Token::end, "", text.size()});
  return tokens;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& atoms) : tokens_(tokenize(text)), atoms_(atoms) {}

  LtlPtr parse() {
    LtlPtr f = implication();
    if (peek().kind != Token::end) throw LtlParseError("unexpected '" + peek().text + "'", peek().position);
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool accept(const std::string& text) {
    if (peek().kind != Token::end && peek().text == text) {
      ++pos_;
      return true;
    }
    return false;
  }

  LtlPtr implication() {
    LtlPtr lhs = disjunction();
    if (accept("->")) return ltl_binary(LtlOp::implication, lhs, implication());
    return lhs;
  }
  LtlPtr disjunction() {
    LtlPtr f = conjunction();
    while (accept("||")) f = ltl_binary(LtlOp::disjunction, f, conjunction());
    return f;
  }
  LtlPtr conjunction() {
    LtlPtr f = temporal();
    while (accept("&&")) f = ltl_binary(LtlOp::conjunction, f, temporal());
    return f;
  }
  LtlPtr temporal() {
    LtlPtr lhs = unary();
    if (accept("U")) return ltl_binary(LtlOp::until, lhs, temporal());
    if (accept("R")) return ltl_binary(LtlOp::release, lhs, temporal());
    return lhs;
  }
  LtlPtr unary() {
    if (accept("!")) return ltl_unary(LtlOp::negation, unary());
    if (accept("X")) return ltl_unary(LtlOp::next, unary());
    if (accept("F") || accept("<>")) return ltl_unary(LtlOp::eventually, unary());
    if (accept("G") || accept("[]")) return ltl_unary(LtlOp::always, unary());
    return primary();
  }
  LtlPtr primary() {
    const Token tok = peek();
    if (tok.kind == Token::end) throw LtlParseError("unexpected end of formula", tok.position);
    if (accept("(")) {
      LtlPtr f = implication();
      if (!accept(")")) throw LtlParseError("expected ')'", peek().position);
      return f;
    }
    if (tok.kind != Token::identifier || tok.text == "U" || tok.text == "R")
      throw LtlParseError("unexpected '" + tok.text + "'", tok.position);
    ++pos_;
    if (tok.text == "true") return ltl_true();
    if (tok.text == "false") return ltl_false();
    if (std::find(atoms_.begin(), atoms_.end(), tok.text) == atoms_.end())
      throw LtlParseError("undeclared atom '" + tok.text + "'", tok.position);
    return ltl_atom(tok.text);
  }

  std::vector<Token> tokens_;
  const std::vector<std::string>& atoms_;
  std::size_t pos_ = 0;
};

}  // namespace

LtlPtr parse_ltl(const std::string& text, const std::vector<std::string>& atoms) {
  return Parser(text, atoms).parse();
}

}  // namespace hiersynth

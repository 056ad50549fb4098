// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "preexp/syntax.hpp"

namespace preexp {
namespace {

enum class Tok {
  kIdent,
  kNumber,
  kAssign,  // :=
  kDraw,    // :~
  kSemi,
  kComma,
  kLParen,
  kRParen,
  kLBrace,
  kRBrace,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kLt,
  kLe,
  kEq,
  kNe,
  kGe,
  kGt,
  kAnd,
  kOr,
  kNot,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kNumber: return "number";
    case Tok::kAssign: return "':='";
    case Tok::kDraw: return "':~'";
    case Tok::kSemi: return "';'";
    case Tok::kComma: return "','";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kSlash: return "'/'";
    case Tok::kLt: return "'<'";
    case Tok::kLe: return "'<='";
    case Tok::kEq: return "'='";
    case Tok::kNe: return "'!='";
    case Tok::kGe: return "'>='";
    case Tok::kGt: return "'>'";
    case Tok::kAnd: return "'&&'";
    case Tok::kOr: return "'||'";
    case Tok::kNot: return "'!'";
    case Tok::kEnd: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](Tok kind, std::size_t len) {
    out.push_back({kind, std::string(src.substr(i, len)), 0.0, line, col});
    advance(len);
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      push(Tok::kIdent, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      Token t{Tok::kNumber, std::string(src.substr(i, j - i)), 0.0, line, col};
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc()) throw ParseError(line, col, "malformed number '" + t.text + "'");
      out.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == ":=") { push(Tok::kAssign, 2); continue; }
    if (two == ":~") { push(Tok::kDraw, 2); continue; }
    if (two == "<=") { push(Tok::kLe, 2); continue; }
    if (two == ">=") { push(Tok::kGe, 2); continue; }
    if (two == "==") { push(Tok::kEq, 2); continue; }
    if (two == "!=") { push(Tok::kNe, 2); continue; }
    if (two == "&&") { push(Tok::kAnd, 2); continue; }
    if (two == "||") { push(Tok::kOr, 2); continue; }
    switch (c) {
      case ';': push(Tok::kSemi, 1); continue;
      case ',': push(Tok::kComma, 1); continue;
      case '(': push(Tok::kLParen, 1); continue;
      case ')': push(Tok::kRParen, 1); continue;
      case '{': push(Tok::kLBrace, 1); continue;
      case '}': push(Tok::kRBrace, 1); continue;
      case '+': push(Tok::kPlus, 1); continue;
      case '-': push(Tok::kMinus, 1); continue;
      case '*': push(Tok::kStar, 1); continue;
      case '/': push(Tok::kSlash, 1); continue;
      case '<': push(Tok::kLt, 1); continue;
      case '>': push(Tok::kGt, 1); continue;
      case '=': push(Tok::kEq, 1); continue;
      case '!': push(Tok::kNot, 1); continue;
      default:
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::kEnd, "", 0.0, line, col});
  return out;
}

bool is_keyword(std::string_view s) {
  static constexpr std::string_view kKeywords[] = {
      "skip", "diverge", "observe", "score", "if", "else", "while",
      "return", "true", "false", "U", "flip"};
  for (auto k : kKeywords) {
    if (s == k) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  StmtPtr program() {
    auto body = statements(Tok::kEnd);
    expect(Tok::kEnd);
    return body;
  }

  ExprPtr standalone_expr() {
    auto e = expr();
    expect(Tok::kEnd);
    return e;
  }

  PredPtr standalone_pred() {
    auto p = pred();
    expect(Tok::kEnd);
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok t) const { return peek().kind == t; }
  bool at_word(std::string_view w) const { return at(Tok::kIdent) && peek().text == w; }

  [[noreturn]] void fail(const std::string& expected) const {
    const auto& t = peek();
    std::string found = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.line, t.column, "expected " + expected + ", found " + found);
  }

  const Token& expect(Tok t) {
    if (!at(t)) fail(describe(t));
    return toks_[pos_++];
  }

  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("'" + std::string(w) + "'");
    ++pos_;
  }

  // stmt* up to (not including) `closer`; semicolons separate and may be omitted.
  StmtPtr statements(Tok closer) {
    std::vector<StmtPtr> items;
    while (!at(closer)) {
      if (at(Tok::kSemi)) {
        ++pos_;
        continue;
      }
      items.push_back(statement());
      if (!at(closer) && !at(Tok::kSemi) && !starts_statement()) {
        fail("';' or " + describe(closer));
      }
    }
    return ast::seq(items);
  }

  bool starts_statement() const {
    return at(Tok::kIdent) || at(Tok::kLBrace);
  }

  StmtPtr block() {
    expect(Tok::kLBrace);
    auto body = statements(Tok::kRBrace);
    expect(Tok::kRBrace);
    return body;
  }

  StmtPtr statement() {
    if (at(Tok::kLBrace)) return block();
    if (!at(Tok::kIdent)) fail("statement");
    const std::string word = peek().text;
    if (word == "skip") {
      ++pos_;
      return ast::skip();
    }
    if (word == "diverge") {
      ++pos_;
      return ast::diverge();
    }
    if (word == "observe") {
      ++pos_;
      expect(Tok::kLParen);
      auto p = pred();
      expect(Tok::kRParen);
      return ast::observe(p);
    }
    if (word == "score") {
      ++pos_;
      expect(Tok::kLParen);
      auto e = expr();
      expect(Tok::kRParen);
      return ast::score(e);
    }
    if (word == "return") {
      ++pos_;
      return ast::ret(expr());
    }
    if (word == "while") {
      ++pos_;
      expect(Tok::kLParen);
      auto p = pred();
      expect(Tok::kRParen);
      return ast::while_loop(p, block());
    }
    if (word == "if") return if_statement();
    if (is_keyword(word)) fail("statement");
    ++pos_;
    Symbol target(word);
    if (at(Tok::kDraw)) {
      ++pos_;
      expect_word("U");
      return ast::draw(target);
    }
    expect(Tok::kAssign);
    // `x := U` is accepted as a draw, matching the listings this grammar follows.
    if (at_word("U")) {
      ++pos_;
      return ast::draw(target);
    }
    return ast::assign(target, expr());
  }

  StmtPtr if_statement() {
    expect_word("if");
    expect(Tok::kLParen);
    ExprPtr flip_prob;
    PredPtr cond;
    if (at_word("flip") && peek(1).kind == Tok::kLParen) {
      pos_ += 2;
      flip_prob = expr();
      expect(Tok::kRParen);
    } else {
      cond = pred();
    }
    expect(Tok::kRParen);
    auto then_branch = block();
    StmtPtr else_branch;
    if (at_word("else")) {
      ++pos_;
      else_branch = at_word("if") ? if_statement() : block();
    }
    if (flip_prob) return ast::flip_if(flip_prob, then_branch, else_branch);
    if (else_branch) return ast::if_else(cond, then_branch, else_branch);
    return ast::if_then(cond, then_branch);
  }

  PredPtr pred() {
    auto lhs = pred_and();
    while (at(Tok::kOr)) {
      ++pos_;
      lhs = ast::disj(lhs, pred_and());
    }
    return lhs;
  }

  PredPtr pred_and() {
    auto lhs = pred_unary();
    while (at(Tok::kAnd)) {
      ++pos_;
      lhs = ast::conj(lhs, pred_unary());
    }
    return lhs;
  }

  PredPtr pred_unary() {
    if (at(Tok::kNot)) {
      ++pos_;
      return ast::neg(pred_unary());
    }
    if (at_word("true")) {
      ++pos_;
      return ast::truth(true);
    }
    if (at_word("false")) {
      ++pos_;
      return ast::truth(false);
    }
    if (at(Tok::kLParen)) {
      // Either a parenthesised predicate or a comparison whose left operand
      // starts with '('; try the comparison first.
      std::size_t saved = pos_;
      try {
        return comparison();
      } catch (const ParseError&) {
        pos_ = saved;
      }
      ++pos_;
      auto p = pred();
      expect(Tok::kRParen);
      return p;
    }
    return comparison();
  }

  PredPtr comparison() {
    auto lhs = expr();
    PredKind kind;
    bool negate = false;
    switch (peek().kind) {
      case Tok::kLt: kind = PredKind::kLt; break;
      case Tok::kLe: kind = PredKind::kLe; break;
      case Tok::kEq: kind = PredKind::kEq; break;
      case Tok::kNe: kind = PredKind::kEq; negate = true; break;
      case Tok::kGe: kind = PredKind::kGe; break;
      case Tok::kGt: kind = PredKind::kGt; break;
      default: fail("comparison operator");
    }
    ++pos_;
    auto p = ast::cmp(kind, lhs, expr());
    return negate ? ast::neg(p) : p;
  }

  ExprPtr expr() {
    auto lhs = term();
    while (at(Tok::kPlus) || at(Tok::kMinus)) {
      auto kind = at(Tok::kPlus) ? ExprKind::kAdd : ExprKind::kSub;
      ++pos_;
      lhs = ast::binary(kind, lhs, term());
    }
    return lhs;
  }

  ExprPtr term() {
    auto lhs = factor();
    while (at(Tok::kStar) || at(Tok::kSlash)) {
      auto kind = at(Tok::kStar) ? ExprKind::kMul : ExprKind::kDiv;
      ++pos_;
      lhs = ast::binary(kind, lhs, factor());
    }
    return lhs;
  }

  ExprPtr factor() {
    if (at(Tok::kMinus)) {
      ++pos_;
      // A minus directly on a numeric literal folds into the literal, so
      // printed negative constants read back unchanged.
      if (at(Tok::kNumber)) return ast::lit(-toks_[pos_++].number);
      return ast::sub(ast::lit(0.0), factor());
    }
    if (at(Tok::kNumber)) return ast::lit(toks_[pos_++].number);
    if (at(Tok::kLParen)) {
      ++pos_;
      auto e = expr();
      expect(Tok::kRParen);
      return e;
    }
    if (!at(Tok::kIdent)) fail("expression");
    const Token& name = toks_[pos_];
    if (peek(1).kind == Tok::kLParen) return call();
    if (is_keyword(name.text)) fail("expression");
    ++pos_;
    return ast::var(name.text);
  }

  ExprPtr call() {
    const Token name = toks_[pos_];
    pos_ += 2;
    std::vector<ExprPtr> args;
    if (!at(Tok::kRParen)) {
      args.push_back(expr());
      while (at(Tok::kComma)) {
        ++pos_;
        args.push_back(expr());
      }
    }
    expect(Tok::kRParen);
    ExprKind kind;
    if (name.text == "gaussian_inv_cdf" || name.text == "Gaussian_inv_cdf") {
      kind = ExprKind::kGaussianInvCdf;
    } else if (name.text == "gaussian_pdf" || name.text == "Gaussian_pdf") {
      kind = ExprKind::kGaussianPdf;
    } else if (name.text == "softeq") {
      kind = ExprKind::kSoftEq;
    } else {
      throw ParseError(name.line, name.column, "unknown builtin '" + name.text + "'");
    }
    if (args.size() != arity(kind)) {
      throw ParseError(name.line, name.column,
                       "builtin '" + name.text + "' expects " + std::to_string(arity(kind)) +
                           " arguments, got " + std::to_string(args.size()));
    }
    if (kind == ExprKind::kSoftEq) return ast::softeq(args[0], args[1]);
    if (kind == ExprKind::kGaussianPdf) return ast::gaussian_pdf(args[0], args[1], args[2]);
    return ast::gaussian_inv_cdf(args[0], args[1], args[2]);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

StmtPtr parse(std::string_view source) { return Parser(source).program(); }
ExprPtr parse_expr(std::string_view source) { return Parser(source).standalone_expr(); }
PredPtr parse_pred(std::string_view source) { return Parser(source).standalone_pred(); }

}  // namespace preexp

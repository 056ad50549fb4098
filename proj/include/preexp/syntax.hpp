// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "preexp/symbol.hpp"

namespace preexp {

struct Expr;
struct Pred;
struct Stmt;
using ExprPtr = std::shared_ptr<const Expr>;
using PredPtr = std::shared_ptr<const Pred>;
using StmtPtr = std::shared_ptr<const Stmt>;

enum class ExprKind {
  kLiteral,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kGaussianInvCdf,  // (mu, sigma, u)
  kGaussianPdf,     // (mu, sigma, x)
  kSoftEq,          // (a, b)
};

struct Expr {
  ExprKind kind = ExprKind::kLiteral;
  double value = 0.0;
  Symbol var;
  std::array<ExprPtr, 3> args;
};

// Number of operands each expression kind carries.
std::size_t arity(ExprKind kind);

enum class PredKind { kBool, kLt, kLe, kEq, kGe, kGt, kAnd, kOr, kNot };

struct Pred {
  PredKind kind = PredKind::kBool;
  bool value = false;
  ExprPtr lhs, rhs;     // comparisons
  PredPtr left, right;  // connectives; kNot uses left only
};

enum class StmtKind {
  kSkip,
  kDiverge,
  kAssign,
  kDraw,
  kObserve,
  kScore,
  kSeq,
  kIf,
  kWhile,
  // Surface sugar, removed by desugar().
  kIfElse,
  kFlipIf,
  kReturn,
};

struct Stmt {
  StmtKind kind = StmtKind::kSkip;
  Symbol var;       // kAssign, kDraw
  ExprPtr expr;     // kAssign, kScore, kReturn; flip probability for kFlipIf
  PredPtr pred;     // kObserve, kIf, kWhile, kIfElse
  StmtPtr first;    // kSeq lhs; then-branch / loop body
  StmtPtr second;   // kSeq rhs; else-branch (optional for kFlipIf)
};

bool is_core(StmtKind kind);

/// A parsed or desugared program. `result` is the expression named by a
/// `return` statement, kept as metadata only.
struct Program {
  StmtPtr body;
  ExprPtr result;
};

namespace ast {

ExprPtr lit(double v);
ExprPtr var(std::string_view name);
ExprPtr var(Symbol s);
ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr gaussian_inv_cdf(ExprPtr mu, ExprPtr sigma, ExprPtr u);
ExprPtr gaussian_pdf(ExprPtr mu, ExprPtr sigma, ExprPtr x);
ExprPtr softeq(ExprPtr a, ExprPtr b);

PredPtr truth(bool v);
PredPtr cmp(PredKind kind, ExprPtr a, ExprPtr b);
PredPtr lt(ExprPtr a, ExprPtr b);
PredPtr le(ExprPtr a, ExprPtr b);
PredPtr eq(ExprPtr a, ExprPtr b);
PredPtr ge(ExprPtr a, ExprPtr b);
PredPtr gt(ExprPtr a, ExprPtr b);
PredPtr conj(PredPtr a, PredPtr b);
PredPtr disj(PredPtr a, PredPtr b);
PredPtr neg(PredPtr a);

StmtPtr skip();
StmtPtr diverge();
StmtPtr assign(Symbol x, ExprPtr e);
StmtPtr assign(std::string_view x, ExprPtr e);
StmtPtr draw(Symbol x);
StmtPtr draw(std::string_view x);
StmtPtr observe(PredPtr p);
StmtPtr score(ExprPtr e);
StmtPtr seq(StmtPtr a, StmtPtr b);
/// Right-nested sequence of `items`; empty input yields skip.
StmtPtr seq(const std::vector<StmtPtr>& items);
StmtPtr if_then(PredPtr p, StmtPtr body);
StmtPtr while_loop(PredPtr p, StmtPtr body);
StmtPtr if_else(PredPtr p, StmtPtr then_branch, StmtPtr else_branch);
StmtPtr flip_if(ExprPtr prob, StmtPtr then_branch, StmtPtr else_branch = nullptr);
StmtPtr ret(ExprPtr e);

}  // namespace ast

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Pred& a, const Pred& b);
bool structurally_equal(const Stmt& a, const Stmt& b);

// Variable occurrences (free or bound).
void collect_vars(const Expr& e, std::set<Symbol>& out);
void collect_vars(const Pred& p, std::set<Symbol>& out);
void collect_vars(const Stmt& s, std::set<Symbol>& out);
std::set<Symbol> vars(const Stmt& s);

/// True when no sugar constructor occurs anywhere in `s`.
bool contains_only_core(const Stmt& s);

/// Reassociates every sequence to right-nested form, so no Seq has a Seq as
/// its left operand. Unchanged subtrees are shared.
StmtPtr right_normalize(const StmtPtr& s);

/// Produces variable names absent from a reserved set.
class FreshNames {
 public:
  explicit FreshNames(std::string prefix = "u", std::set<Symbol> avoid = {});

  void avoid(Symbol s) { avoid_.insert(s); }
  void avoid(const std::set<Symbol>& names) { avoid_.insert(names.begin(), names.end()); }
  Symbol next();

 private:
  std::string prefix_;
  std::set<Symbol> avoid_;
  std::size_t counter_ = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses surface syntax into a (possibly sugared) statement tree.
StmtPtr parse(std::string_view source);
/// Parses a standalone expression, e.g. a postexpectation given on the CLI.
ExprPtr parse_expr(std::string_view source);
PredPtr parse_pred(std::string_view source);

/// Rewrites sugar into core statements. Fresh variables come from `fresh`,
/// which must avoid vars(s); the overload without it builds one.
Program desugar(const StmtPtr& s, FreshNames& fresh);
Program desugar(const StmtPtr& s);

std::string pretty(const Stmt& s);
std::string pretty(const Expr& e);
std::string pretty(const Pred& p);

}  // namespace preexp

// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <utility>

#include "preexp/syntax.hpp"

namespace preexp {

std::size_t arity(ExprKind kind) {
  switch (kind) {
    case ExprKind::kLiteral:
    case ExprKind::kVar:
      return 0;
    case ExprKind::kAdd:
    case ExprKind::kSub:
    case ExprKind::kMul:
    case ExprKind::kDiv:
    case ExprKind::kSoftEq:
      return 2;
    case ExprKind::kGaussianInvCdf:
    case ExprKind::kGaussianPdf:
      return 3;
  }
  return 0;
}

bool is_core(StmtKind kind) {
  return kind != StmtKind::kIfElse && kind != StmtKind::kFlipIf && kind != StmtKind::kReturn;
}

namespace ast {
namespace {

StmtPtr make(Stmt s) { return std::make_shared<const Stmt>(std::move(s)); }

}  // namespace

ExprPtr lit(double v) {
  Expr e;
  e.kind = ExprKind::kLiteral;
  e.value = v;
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr var(std::string_view name) { return var(Symbol(name)); }

ExprPtr var(Symbol s) {
  Expr e;
  e.kind = ExprKind::kVar;
  e.var = s;
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b) {
  Expr e;
  e.kind = kind;
  e.args = {std::move(a), std::move(b), nullptr};
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprKind::kAdd, std::move(a), std::move(b)); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprKind::kSub, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprKind::kMul, std::move(a), std::move(b)); }
ExprPtr div(ExprPtr a, ExprPtr b) { return binary(ExprKind::kDiv, std::move(a), std::move(b)); }
ExprPtr softeq(ExprPtr a, ExprPtr b) {
  return binary(ExprKind::kSoftEq, std::move(a), std::move(b));
}

ExprPtr gaussian_inv_cdf(ExprPtr mu, ExprPtr sigma, ExprPtr u) {
  Expr e;
  e.kind = ExprKind::kGaussianInvCdf;
  e.args = {std::move(mu), std::move(sigma), std::move(u)};
  return std::make_shared<const Expr>(std::move(e));
}

ExprPtr gaussian_pdf(ExprPtr mu, ExprPtr sigma, ExprPtr x) {
  Expr e;
  e.kind = ExprKind::kGaussianPdf;
  e.args = {std::move(mu), std::move(sigma), std::move(x)};
  return std::make_shared<const Expr>(std::move(e));
}

PredPtr truth(bool v) {
  Pred p;
  p.kind = PredKind::kBool;
  p.value = v;
  return std::make_shared<const Pred>(std::move(p));
}

PredPtr cmp(PredKind kind, ExprPtr a, ExprPtr b) {
  Pred p;
  p.kind = kind;
  p.lhs = std::move(a);
  p.rhs = std::move(b);
  return std::make_shared<const Pred>(std::move(p));
}

PredPtr lt(ExprPtr a, ExprPtr b) { return cmp(PredKind::kLt, std::move(a), std::move(b)); }
PredPtr le(ExprPtr a, ExprPtr b) { return cmp(PredKind::kLe, std::move(a), std::move(b)); }
PredPtr eq(ExprPtr a, ExprPtr b) { return cmp(PredKind::kEq, std::move(a), std::move(b)); }
PredPtr ge(ExprPtr a, ExprPtr b) { return cmp(PredKind::kGe, std::move(a), std::move(b)); }
PredPtr gt(ExprPtr a, ExprPtr b) { return cmp(PredKind::kGt, std::move(a), std::move(b)); }

PredPtr conj(PredPtr a, PredPtr b) {
  Pred p;
  p.kind = PredKind::kAnd;
  p.left = std::move(a);
  p.right = std::move(b);
  return std::make_shared<const Pred>(std::move(p));
}

PredPtr disj(PredPtr a, PredPtr b) {
  Pred p;
  p.kind = PredKind::kOr;
  p.left = std::move(a);
  p.right = std::move(b);
  return std::make_shared<const Pred>(std::move(p));
}

PredPtr neg(PredPtr a) {
  Pred p;
  p.kind = PredKind::kNot;
  p.left = std::move(a);
  return std::make_shared<const Pred>(std::move(p));
}

StmtPtr skip() { return make({.kind = StmtKind::kSkip}); }
StmtPtr diverge() { return make({.kind = StmtKind::kDiverge}); }

StmtPtr assign(Symbol x, ExprPtr e) {
  return make({.kind = StmtKind::kAssign, .var = x, .expr = std::move(e)});
}
StmtPtr assign(std::string_view x, ExprPtr e) { return assign(Symbol(x), std::move(e)); }

StmtPtr draw(Symbol x) { return make({.kind = StmtKind::kDraw, .var = x}); }
StmtPtr draw(std::string_view x) { return draw(Symbol(x)); }

StmtPtr observe(PredPtr p) { return make({.kind = StmtKind::kObserve, .pred = std::move(p)}); }
StmtPtr score(ExprPtr e) { return make({.kind = StmtKind::kScore, .expr = std::move(e)}); }

StmtPtr seq(StmtPtr a, StmtPtr b) {
  return make({.kind = StmtKind::kSeq, .first = std::move(a), .second = std::move(b)});
}

StmtPtr seq(const std::vector<StmtPtr>& items) {
  if (items.empty()) return skip();
  StmtPtr out = items.back();
  for (auto it = items.rbegin() + 1; it != items.rend(); ++it) out = seq(*it, out);
  return out;
}

StmtPtr if_then(PredPtr p, StmtPtr body) {
  return make({.kind = StmtKind::kIf, .pred = std::move(p), .first = std::move(body)});
}

StmtPtr while_loop(PredPtr p, StmtPtr body) {
  return make({.kind = StmtKind::kWhile, .pred = std::move(p), .first = std::move(body)});
}

StmtPtr if_else(PredPtr p, StmtPtr then_branch, StmtPtr else_branch) {
  return make({.kind = StmtKind::kIfElse,
               .pred = std::move(p),
               .first = std::move(then_branch),
               .second = std::move(else_branch)});
}

StmtPtr flip_if(ExprPtr prob, StmtPtr then_branch, StmtPtr else_branch) {
  return make({.kind = StmtKind::kFlipIf,
               .expr = std::move(prob),
               .first = std::move(then_branch),
               .second = std::move(else_branch)});
}

StmtPtr ret(ExprPtr e) { return make({.kind = StmtKind::kReturn, .expr = std::move(e)}); }

}  // namespace ast

namespace {

template <typename T>
bool ptr_equal(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return structurally_equal(*a, *b);
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::kLiteral:
      // Bitwise-identical literals only; -0 and 0 print differently.
      return std::signbit(a.value) == std::signbit(b.value) && a.value == b.value;
    case ExprKind::kVar:
      return a.var == b.var;
    default:
      for (std::size_t i = 0; i < arity(a.kind); ++i) {
        if (!ptr_equal(a.args[i], b.args[i])) return false;
      }
      return true;
  }
}

bool structurally_equal(const Pred& a, const Pred& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case PredKind::kBool:
      return a.value == b.value;
    case PredKind::kAnd:
    case PredKind::kOr:
      return ptr_equal(a.left, b.left) && ptr_equal(a.right, b.right);
    case PredKind::kNot:
      return ptr_equal(a.left, b.left);
    default:
      return ptr_equal(a.lhs, b.lhs) && ptr_equal(a.rhs, b.rhs);
  }
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.var == b.var && ptr_equal(a.expr, b.expr) &&
         ptr_equal(a.pred, b.pred) && ptr_equal(a.first, b.first) &&
         ptr_equal(a.second, b.second);
}

void collect_vars(const Expr& e, std::set<Symbol>& out) {
  if (e.kind == ExprKind::kVar) out.insert(e.var);
  for (std::size_t i = 0; i < arity(e.kind); ++i) collect_vars(*e.args[i], out);
}

void collect_vars(const Pred& p, std::set<Symbol>& out) {
  if (p.lhs) collect_vars(*p.lhs, out);
  if (p.rhs) collect_vars(*p.rhs, out);
  if (p.left) collect_vars(*p.left, out);
  if (p.right) collect_vars(*p.right, out);
}

void collect_vars(const Stmt& s, std::set<Symbol>& out) {
  if (s.kind == StmtKind::kAssign || s.kind == StmtKind::kDraw) out.insert(s.var);
  if (s.expr) collect_vars(*s.expr, out);
  if (s.pred) collect_vars(*s.pred, out);
  if (s.first) collect_vars(*s.first, out);
  if (s.second) collect_vars(*s.second, out);
}

std::set<Symbol> vars(const Stmt& s) {
  std::set<Symbol> out;
  collect_vars(s, out);
  return out;
}

bool contains_only_core(const Stmt& s) {
  if (!is_core(s.kind)) return false;
  if (s.first && !contains_only_core(*s.first)) return false;
  if (s.second && !contains_only_core(*s.second)) return false;
  return true;
}

namespace {

void flatten(const StmtPtr& s, std::vector<StmtPtr>& out);

StmtPtr normalize(const StmtPtr& s) {
  switch (s->kind) {
    case StmtKind::kSeq: {
      if (s->first->kind != StmtKind::kSeq) {
        auto b = normalize(s->second);
        auto a = normalize(s->first);
        return a == s->first && b == s->second ? s : ast::seq(a, b);
      }
      std::vector<StmtPtr> items;
      flatten(s, items);
      return ast::seq(items);
    }
    case StmtKind::kIf:
    case StmtKind::kWhile:
    case StmtKind::kIfElse:
    case StmtKind::kFlipIf: {
      auto a = normalize(s->first);
      auto b = s->second ? normalize(s->second) : nullptr;
      if (a == s->first && b == s->second) return s;
      Stmt copy = *s;
      copy.first = a;
      copy.second = b;
      return std::make_shared<const Stmt>(std::move(copy));
    }
    default:
      return s;
  }
}

void flatten(const StmtPtr& s, std::vector<StmtPtr>& out) {
  if (s->kind == StmtKind::kSeq) {
    flatten(s->first, out);
    flatten(s->second, out);
  } else {
    out.push_back(normalize(s));
  }
}

}  // namespace

StmtPtr right_normalize(const StmtPtr& s) { return normalize(s); }

FreshNames::FreshNames(std::string prefix, std::set<Symbol> avoid)
    : prefix_(std::move(prefix)), avoid_(std::move(avoid)) {}

Symbol FreshNames::next() {
  for (;;) {
    Symbol candidate(prefix_ + "_" + std::to_string(counter_++));
    if (avoid_.insert(candidate).second) return candidate;
  }
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace preexp

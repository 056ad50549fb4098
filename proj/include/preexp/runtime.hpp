// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preexp/symbol.hpp"
#include "preexp/syntax.hpp"

namespace preexp {

/// NaN and infinities collapse to 0 at every evaluation boundary.
inline double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

// Normal distribution helpers; sigma is the standard deviation.
double gaussian_cdf(double mu, double sigma, double x);
/// Inverse cdf. u is clamped into [0,1] and the endpoints map to 0.
double gaussian_inv_cdf(double mu, double sigma, double u);
/// Density; 0 when sigma <= 0.
double gaussian_pdf(double mu, double sigma, double x);
double standard_normal_quantile(double p);
double softeq(double a, double b);

/// Finite map from variables to reals with value semantics: copies never
/// observe later updates of the original.
class State {
 public:
  State() = default;
  State(std::initializer_list<std::pair<const std::string, double>> init);

  /// Unbound variables read as 0.
  double get(Symbol x) const;
  double get(std::string_view x) const { return get(Symbol(x)); }
  bool contains(Symbol x) const { return values_.count(x) != 0; }
  std::size_t size() const { return values_.size(); }
  /// Non-finite values are stored as 0.
  void set(Symbol x, double v) { values_[x] = finite_or_zero(v); }

  const std::map<Symbol, double>& entries() const { return values_; }

  friend bool operator==(const State&, const State&) = default;

 private:
  std::map<Symbol, double> values_;
};

/// Functional update sigma[x -> v].
State update(const State& s, Symbol x, double v);

/// Sorted {"name": value} JSON object.
std::string to_json(const State& s);
/// Parses a flat JSON object of numbers. Throws std::invalid_argument.
State state_from_json(const std::string& text);

/// Extended state: proper, error (observe failed) or diverged.
struct ExtState {
  enum class Kind { kProper, kError, kDiverged };
  Kind kind = Kind::kProper;
  State state;

  static ExtState proper(State s) { return {Kind::kProper, std::move(s)}; }
  static ExtState error() { return {Kind::kError, {}}; }
  static ExtState diverged() { return {Kind::kDiverged, {}}; }
  bool is_proper() const { return kind == Kind::kProper; }
};

/// Mutable flat state indexed by symbol id, used inside run loops.
class FlatState {
 public:
  double get(Symbol x) const {
    auto id = x.id();
    return id < values_.size() ? values_[id] : 0.0;
  }
  void set(Symbol x, double v) {
    auto id = x.id();
    if (id < values_.size() && bound_[id]) {
      values_[id] = finite_or_zero(v);
    } else {
      set_slow(x, v);
    }
  }
  void load(const State& s);
  void clear();
  State to_state() const;

 private:
  void set_slow(Symbol x, double v);

  std::vector<double> values_;
  std::vector<std::uint8_t> bound_;
  std::vector<std::uint32_t> touched_;
};

template <class Env>
double eval_expr(const Env& env, const Expr& e);

template <class Env>
bool eval_pred(const Env& env, const Pred& p);

namespace detail {

template <class Env>
double eval_raw(const Env& env, const Expr& e) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      return e.value;
    case ExprKind::kVar:
      return env.get(e.var);
    case ExprKind::kAdd:
      return eval_raw(env, *e.args[0]) + eval_raw(env, *e.args[1]);
    case ExprKind::kSub:
      return eval_raw(env, *e.args[0]) - eval_raw(env, *e.args[1]);
    case ExprKind::kMul:
      return finite_or_zero(eval_raw(env, *e.args[0]) * eval_raw(env, *e.args[1]));
    case ExprKind::kDiv: {
      double d = eval_raw(env, *e.args[1]);
      return d == 0.0 ? 0.0 : finite_or_zero(eval_raw(env, *e.args[0]) / d);
    }
    case ExprKind::kGaussianInvCdf:
      return gaussian_inv_cdf(eval_raw(env, *e.args[0]), eval_raw(env, *e.args[1]),
                              eval_raw(env, *e.args[2]));
    case ExprKind::kGaussianPdf:
      return gaussian_pdf(eval_raw(env, *e.args[0]), eval_raw(env, *e.args[1]),
                          eval_raw(env, *e.args[2]));
    case ExprKind::kSoftEq:
      return softeq(eval_raw(env, *e.args[0]), eval_raw(env, *e.args[1]));
  }
  return 0.0;
}

}  // namespace detail

template <class Env>
double eval_expr(const Env& env, const Expr& e) {
  return finite_or_zero(detail::eval_raw(env, e));
}

template <class Env>
bool eval_pred(const Env& env, const Pred& p) {
  switch (p.kind) {
    case PredKind::kBool:
      return p.value;
    case PredKind::kLt:
      return eval_expr(env, *p.lhs) < eval_expr(env, *p.rhs);
    case PredKind::kLe:
      return eval_expr(env, *p.lhs) <= eval_expr(env, *p.rhs);
    case PredKind::kEq:
      return eval_expr(env, *p.lhs) == eval_expr(env, *p.rhs);
    case PredKind::kGe:
      return eval_expr(env, *p.lhs) >= eval_expr(env, *p.rhs);
    case PredKind::kGt:
      return eval_expr(env, *p.lhs) > eval_expr(env, *p.rhs);
    case PredKind::kAnd:
      return eval_pred(env, *p.left) && eval_pred(env, *p.right);
    case PredKind::kOr:
      return eval_pred(env, *p.left) || eval_pred(env, *p.right);
    case PredKind::kNot:
      return !eval_pred(env, *p.left);
  }
  return false;
}

/// Postfix form of an expression or predicate for fast repeated evaluation.
/// Results agree exactly with eval_expr / eval_pred (predicates yield 0 or 1).
class Compiled {
 public:
  Compiled() = default;
  static Compiled expr(const ExprPtr& e);
  static Compiled pred(const PredPtr& p);

  template <class Env>
  double value(const Env& env) const;
  template <class Env>
  bool holds(const Env& env) const {
    return value(env) != 0.0;
  }

 private:
  enum class Op : std::uint8_t {
    kConst, kVar, kAdd, kSub, kMul, kDiv, kInvCdf, kPdf, kSoftEq,
    kLt, kLe, kEq, kGe, kGt, kAnd, kOr, kNot, kFinite
  };
  struct Instr {
    Op op;
    Symbol var;
    double value;
  };
  static constexpr std::size_t kMaxStack = 64;

  // Short programs evaluated without the stack loop.
  enum class Shape : std::uint8_t { kGeneral, kConst, kVar, kVarConst };

  // Returns true when the pushed value may be non-finite.
  bool emit(const Expr& e, std::size_t depth);
  void emit(const Pred& p, std::size_t depth);
  void classify();
  template <class Env>
  [[gnu::noinline]] double run_stack(const Env& env) const;

  static double apply(Op op, double a, double b) {
    switch (op) {
      case Op::kAdd: return a + b;
      case Op::kSub: return a - b;
      case Op::kMul: return finite_or_zero(a * b);
      case Op::kDiv: return b == 0.0 ? 0.0 : finite_or_zero(a / b);
      case Op::kLt: return a < b;
      case Op::kLe: return a <= b;
      case Op::kEq: return a == b;
      case Op::kGe: return a >= b;
      default: return a > b;
    }
  }

  Shape shape_ = Shape::kGeneral;
  Op shape_op_ = Op::kConst;
  bool shape_finite_ = false;  // coerce the fast-path result
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  // Fallback for trees deeper than the fixed evaluation stack.
  ExprPtr expr_;
  PredPtr pred_;
};

template <class Env>
double Compiled::value(const Env& env) const {
  switch (shape_) {
    case Shape::kConst: return code_[0].value;
    case Shape::kVar: return env.get(code_[0].var);
    case Shape::kVarConst: {
      double v = apply(shape_op_, env.get(code_[0].var), code_[1].value);
      return shape_finite_ ? finite_or_zero(v) : v;
    }
    case Shape::kGeneral: break;
  }
  return run_stack(env);
}

template <class Env>
double Compiled::run_stack(const Env& env) const {
  if (max_depth_ > kMaxStack) {
    return expr_ ? eval_expr(env, *expr_) : (eval_pred(env, *pred_) ? 1.0 : 0.0);
  }
  // The top of the stack lives in `acc`; st holds the entries below it.
  double st[kMaxStack + 1];
  double* sp = st;
  double acc = 0.0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::kConst: *sp++ = acc; acc = in.value; break;
      case Op::kVar: *sp++ = acc; acc = env.get(in.var); break;
      case Op::kAdd: acc = *--sp + acc; break;
      case Op::kSub: acc = *--sp - acc; break;
      case Op::kMul: acc = finite_or_zero(*--sp * acc); break;
      case Op::kDiv: {
        double a = *--sp;
        acc = acc == 0.0 ? 0.0 : finite_or_zero(a / acc);
        break;
      }
      case Op::kInvCdf: sp -= 2; acc = gaussian_inv_cdf(sp[0], sp[1], acc); break;
      case Op::kPdf: sp -= 2; acc = gaussian_pdf(sp[0], sp[1], acc); break;
      case Op::kSoftEq: acc = softeq(*--sp, acc); break;
      case Op::kLt: acc = *--sp < acc; break;
      case Op::kLe: acc = *--sp <= acc; break;
      case Op::kEq: acc = *--sp == acc; break;
      case Op::kGe: acc = *--sp >= acc; break;
      case Op::kGt: acc = *--sp > acc; break;
      case Op::kAnd: acc = (*--sp != 0.0 && acc != 0.0) ? 1.0 : 0.0; break;
      case Op::kOr: acc = (*--sp != 0.0 || acc != 0.0) ? 1.0 : 0.0; break;
      case Op::kNot: acc = acc != 0.0 ? 0.0 : 1.0; break;
      case Op::kFinite: acc = finite_or_zero(acc); break;
    }
  }
  return acc;
}

/// A nonnegative function on final states given by an expression, clamped
/// into [0, bound] (or [0, inf) without a bound).
struct Postexpectation {
  ExprPtr expr;
  std::optional<double> bound;

  static Postexpectation constant(double v, std::optional<double> bound = std::nullopt);
  static Postexpectation parse(std::string_view source, std::optional<double> bound = std::nullopt);

  template <class Env>
  double operator()(const Env& env) const {
    double v = eval_expr(env, *expr);
    if (v < 0.0) return 0.0;
    return bound && v > *bound ? *bound : v;
  }

  /// f-hat: 0 on error and divergence.
  double hat(const ExtState& s) const { return s.is_proper() ? (*this)(s.state) : 0.0; }
  /// f-check: 1 on divergence, 0 on error. Meaningful for bound <= 1.
  double check(const ExtState& s) const {
    if (s.kind == ExtState::Kind::kDiverged) return 1.0;
    return s.is_proper() ? (*this)(s.state) : 0.0;
  }
};

}  // namespace preexp

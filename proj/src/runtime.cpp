// SPDX-License-Identifier: Apache-2.0

#include "preexp/runtime.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace preexp {

State::State(std::initializer_list<std::pair<const std::string, double>> init) {
  for (const auto& [name, v] : init) set(Symbol(name), v);
}

double State::get(Symbol x) const {
  auto it = values_.find(x);
  return it == values_.end() ? 0.0 : it->second;
}

State update(const State& s, Symbol x, double v) {
  State out = s;
  out.set(x, v);
  return out;
}

std::string to_json(const State& s) {
  // std::map over Symbol already iterates in name order.
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [x, v] : s.entries()) j[x.name()] = v;
  return j.dump();
}

State state_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("state: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("state: expected a JSON object");
  State s;
  for (const auto& [name, v] : j.items()) {
    if (!v.is_number()) throw std::invalid_argument("state: value of '" + name + "' is not a number");
    s.set(Symbol(name), v.get<double>());
  }
  return s;
}

void FlatState::set_slow(Symbol x, double v) {
  auto id = x.id();
  if (id >= values_.size()) {
    values_.resize(id + 1, 0.0);
    bound_.resize(id + 1, 0);
  }
  if (!bound_[id]) {
    bound_[id] = 1;
    touched_.push_back(id);
  }
  values_[id] = finite_or_zero(v);
}

void FlatState::load(const State& s) {
  clear();
  for (const auto& [x, v] : s.entries()) set(x, v);
}

void FlatState::clear() {
  for (auto id : touched_) {
    values_[id] = 0.0;
    bound_[id] = 0;
  }
  touched_.clear();
}

State FlatState::to_state() const {
  State s;
  for (auto id : touched_) s.set(Symbol::from_id(id), values_[id]);
  return s;
}

Compiled Compiled::expr(const ExprPtr& e) {
  Compiled c;
  if (c.emit(*e, 1)) c.code_.push_back({Op::kFinite, Symbol(), 0.0});
  if (c.max_depth_ > kMaxStack) c.expr_ = e;
  c.classify();
  return c;
}

Compiled Compiled::pred(const PredPtr& p) {
  Compiled c;
  c.emit(*p, 1);
  if (c.max_depth_ > kMaxStack) c.pred_ = p;
  c.classify();
  return c;
}

void Compiled::classify() {
  std::size_t n = code_.size();
  bool finite = n > 0 && code_.back().op == Op::kFinite;
  if (finite) --n;
  if (n == 1 && !finite && code_[0].op == Op::kConst) {
    shape_ = Shape::kConst;
  } else if (n == 1 && !finite && code_[0].op == Op::kVar) {
    shape_ = Shape::kVar;
  } else if (n == 3 && code_[0].op == Op::kVar && code_[1].op == Op::kConst) {
    switch (code_[2].op) {
      case Op::kAdd: case Op::kSub: case Op::kMul: case Op::kDiv:
      case Op::kLt: case Op::kLe: case Op::kEq: case Op::kGe: case Op::kGt:
        shape_ = Shape::kVarConst;
        shape_op_ = code_[2].op;
        shape_finite_ = finite;
        break;
      default:
        break;
    }
  }
}

// `depth` is the stack height once this node's value is pushed.
bool Compiled::emit(const Expr& e, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  switch (e.kind) {
    case ExprKind::kLiteral:
      code_.push_back({Op::kConst, Symbol(), e.value});
      return !std::isfinite(e.value);
    case ExprKind::kVar:
      code_.push_back({Op::kVar, e.var, 0.0});
      return false;
    default:
      break;
  }
  std::size_t n = arity(e.kind);
  for (std::size_t i = 0; i < n; ++i) emit(*e.args[i], depth + i);
  static constexpr Op kOps[] = {Op::kAdd, Op::kSub, Op::kMul, Op::kDiv,
                                Op::kInvCdf, Op::kPdf, Op::kSoftEq};
  code_.push_back({kOps[static_cast<int>(e.kind) - static_cast<int>(ExprKind::kAdd)], Symbol(), 0.0});
  // Products, quotients and builtins coerce their own result.
  return e.kind == ExprKind::kAdd || e.kind == ExprKind::kSub;
}

void Compiled::emit(const Pred& p, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  switch (p.kind) {
    case PredKind::kBool:
      code_.push_back({Op::kConst, Symbol(), p.value ? 1.0 : 0.0});
      return;
    case PredKind::kAnd:
    case PredKind::kOr:
      emit(*p.left, depth);
      emit(*p.right, depth + 1);
      code_.push_back({p.kind == PredKind::kAnd ? Op::kAnd : Op::kOr, Symbol(), 0.0});
      return;
    case PredKind::kNot:
      emit(*p.left, depth);
      code_.push_back({Op::kNot, Symbol(), 0.0});
      return;
    default: {
      if (emit(*p.lhs, depth)) code_.push_back({Op::kFinite, Symbol(), 0.0});
      if (emit(*p.rhs, depth + 1)) code_.push_back({Op::kFinite, Symbol(), 0.0});
      static constexpr Op kOps[] = {Op::kLt, Op::kLe, Op::kEq, Op::kGe, Op::kGt};
      code_.push_back({kOps[static_cast<int>(p.kind) - static_cast<int>(PredKind::kLt)], Symbol(), 0.0});
      return;
    }
  }
}

Postexpectation Postexpectation::constant(double v, std::optional<double> bound) {
  return {ast::lit(v), bound};
}

Postexpectation Postexpectation::parse(std::string_view source, std::optional<double> bound) {
  return {parse_expr(source), bound};
}

}  // namespace preexp

// SPDX-License-Identifier: Apache-2.0

#include "preexp/wpeval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace preexp {

InfeasibleQuery::InfeasibleQuery(std::size_t nesting, std::uint64_t ceiling)
    : std::runtime_error("quadrature exceeds the cost ceiling of " + std::to_string(ceiling) +
                         " leaf evaluations (draw nesting depth " + std::to_string(nesting) +
                         "); use the Monte Carlo estimator"),
      nesting_(nesting) {}

void Valuation::set(Symbol x, double v) {
  auto id = x.id();
  if (id >= values_.size()) {
    values_.resize(id + 1, 0.0);
    bound_.resize(id + 1, 0);
  }
  values_[id] = finite_or_zero(v);
  bound_[id] = 1;
}

void Valuation::restore(Symbol x, double old_value, bool old_bound) {
  auto id = x.id();
  values_[id] = old_value;
  bound_[id] = old_bound ? 1 : 0;
}

void Valuation::load(const State& s) {
  values_.assign(values_.size(), 0.0);
  bound_.assign(bound_.size(), 0);
  for (const auto& [x, v] : s.entries()) set(x, v);
}

State Valuation::to_state() const {
  State s;
  for (std::uint32_t id = 0; id < bound_.size(); ++id) {
    if (bound_[id]) s.set(Symbol::from_id(id), values_[id]);
  }
  return s;
}

ExpectationFn ExpectationFn::from(const Postexpectation& f) {
  std::set<Symbol> reads;
  collect_vars(*f.expr, reads);
  return {[f](const Valuation& v) { return f(v); }, std::move(reads), f.bound};
}

ExpectationFn ExpectationFn::constant(double v) {
  double c = std::max(0.0, finite_or_zero(v));
  return {[c](const Valuation&) { return c; }, std::set<Symbol>{}, c};
}

ExpectationFn ExpectationFn::from_state(std::function<double(const State&)> fn,
                                        std::optional<double> bound) {
  return {[fn = std::move(fn)](const Valuation& v) { return fn(v.to_state()); }, std::nullopt,
          bound};
}

namespace {

using VarSet = std::set<Symbol>;

void reads_of(const Expr& e, VarSet& out) { collect_vars(e, out); }
void reads_of(const Pred& p, VarSet& out) { collect_vars(p, out); }

// Backward liveness: variables whose value before `s` can influence the
// result, given the variables `out` live after it.
VarSet live_in(const Stmt& s, const VarSet& out) {
  switch (s.kind) {
    case StmtKind::kSkip:
      return out;
    case StmtKind::kDiverge:
      return {};
    case StmtKind::kAssign: {
      VarSet in = out;
      if (!in.erase(s.var)) return in;
      reads_of(*s.expr, in);
      return in;
    }
    case StmtKind::kDraw: {
      VarSet in = out;
      in.erase(s.var);
      return in;
    }
    case StmtKind::kObserve: {
      VarSet in = out;
      reads_of(*s.pred, in);
      return in;
    }
    case StmtKind::kScore: {
      VarSet in = out;
      reads_of(*s.expr, in);
      return in;
    }
    case StmtKind::kSeq:
      return live_in(*s.first, live_in(*s.second, out));
    case StmtKind::kIf: {
      VarSet in = live_in(*s.first, out);
      in.insert(out.begin(), out.end());
      reads_of(*s.pred, in);
      return in;
    }
    case StmtKind::kWhile: {
      VarSet x = out;
      reads_of(*s.pred, x);
      for (;;) {
        VarSet next = live_in(*s.first, x);
        next.insert(x.begin(), x.end());
        if (next.size() == x.size()) return x;
        x = std::move(next);
      }
    }
    default:
      throw std::invalid_argument("structural evaluation needs a desugared program");
  }
}

struct FrameNode {
  const Stmt* stmt;
  std::uint64_t depth;  // remaining iterations when stmt is a While
  std::int64_t parent;  // -1 for the empty continuation
};

struct FrameKey {
  const Stmt* stmt;
  std::uint64_t depth;
  std::int64_t parent;
  friend bool operator==(const FrameKey&, const FrameKey&) = default;
};

struct FrameKeyHash {
  std::size_t operator()(const FrameKey& k) const noexcept {
    std::size_t h = std::hash<const void*>{}(k.stmt);
    h ^= std::hash<std::uint64_t>{}(k.depth) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::int64_t>{}(k.parent) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct WordsHash {
  std::size_t operator()(const std::vector<std::uint64_t>& w) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : w) {
      h ^= x;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

class Evaluator {
 public:
  Evaluator(const ExpectationFn& f, const QuadConfig& q, const VarSet& program_vars)
      : f_(f), q_(q), liberal_(q.mode == QuadMode::kWlp) {
    root_live_ = f.reads ? *f.reads : program_vars;
  }

  double run(const Stmt& c, const State& sigma) {
    env_.load(sigma);
    return exec(&c, q_.max_depth, -1);
  }

 private:
  double bottom() {
    tick();
    return liberal_ ? 1.0 : 0.0;
  }

  void tick() {
    if (++leaves_ > q_.cost_ceiling) throw InfeasibleQuery(nesting_hint_, q_.cost_ceiling);
  }

  std::int64_t push(const Stmt* s, std::uint64_t depth, std::int64_t parent) {
    FrameKey key{s, depth, parent};
    auto [it, inserted] = frame_ids_.try_emplace(key, static_cast<std::int64_t>(frames_.size()));
    if (inserted) frames_.push_back({s, depth, parent});
    return it->second;
  }

  double resume(std::int64_t k) {
    if (k < 0) {
      tick();
      return std::max(0.0, finite_or_zero(clamp(f_.fn(env_))));
    }
    const FrameNode& fr = frames_[static_cast<std::size_t>(k)];
    return exec(fr.stmt, fr.depth, fr.parent);
  }

  double clamp(double v) const { return f_.bound && v > *f_.bound ? *f_.bound : v; }

  // `depth` is the remaining iteration count when s is a While.
  double exec(const Stmt* s, std::uint64_t depth, std::int64_t k) {
    switch (s->kind) {
      case StmtKind::kSkip:
        return resume(k);
      case StmtKind::kDiverge:
        return bottom();
      case StmtKind::kAssign: {
        double old = env_.get(s->var);
        bool was_bound = env_.bound(s->var);
        env_.set(s->var, eval_expr(env_, *s->expr));
        double r = resume(k);
        env_.restore(s->var, old, was_bound);
        return r;
      }
      case StmtKind::kDraw:
        return draw(s, k);
      case StmtKind::kObserve:
        if (!eval_pred(env_, *s->pred)) {
          tick();
          return 0.0;
        }
        return resume(k);
      case StmtKind::kScore: {
        double v = eval_expr(env_, *s->expr);
        if (!(v > 0.0 && v <= 1.0)) {
          tick();
          return 0.0;
        }
        return v * resume(k);
      }
      case StmtKind::kSeq:
        return exec(s->first.get(), q_.max_depth, push(s->second.get(), q_.max_depth, k));
      case StmtKind::kIf:
        return eval_pred(env_, *s->pred) ? exec(s->first.get(), q_.max_depth, k) : resume(k);
      case StmtKind::kWhile:
        if (depth == 0) return bottom();
        if (!eval_pred(env_, *s->pred)) return resume(k);
        return exec(s->first.get(), q_.max_depth, push(s, depth - 1, k));
      default:
        throw std::invalid_argument("structural evaluation needs a desugared program");
    }
  }

  double draw(const Stmt* s, std::int64_t k) {
    std::vector<std::uint64_t>* key = nullptr;
    std::vector<std::uint64_t> scratch;
    if (q_.memoize) {
      scratch.push_back(static_cast<std::uint64_t>(k));
      scratch.push_back(reinterpret_cast<std::uintptr_t>(s));
      for (Symbol x : live(k)) {
        if (x == s->var) continue;
        scratch.push_back(std::bit_cast<std::uint64_t>(env_.get(x)));
        scratch.push_back(env_.bound(x) ? 1 : 0);
      }
      auto it = memo_.find(scratch);
      if (it != memo_.end()) return it->second;
      key = &scratch;
    }

    double old = env_.get(s->var);
    bool was_bound = env_.bound(s->var);
    const double h = 1.0 / static_cast<double>(q_.nodes);
    double sum = 0.0;
    for (std::uint64_t j = 0; j < q_.nodes; ++j) {
      env_.set(s->var, (static_cast<double>(j) + 0.5) * h);
      sum += resume(k);
    }
    env_.restore(s->var, old, was_bound);
    double r = sum * h;
    if (key) memo_.emplace(std::move(*key), r);
    return r;
  }

  const std::vector<Symbol>& live(std::int64_t k) {
    auto idx = static_cast<std::size_t>(k + 1);
    if (idx >= live_.size()) live_.resize(std::max(idx + 1, frames_.size() + 1));
    if (!live_[idx]) {
      VarSet out;
      if (k < 0) {
        out = root_live_;
      } else {
        const FrameNode fr = frames_[static_cast<std::size_t>(k)];
        live(fr.parent);
        const auto& parent = *live_[static_cast<std::size_t>(fr.parent + 1)];
        out = live_in(*fr.stmt, VarSet(parent.begin(), parent.end()));
      }
      live_[idx] = std::vector<Symbol>(out.begin(), out.end());
    }
    return *live_[idx];
  }

 public:
  std::size_t nesting_hint_ = 0;

 private:
  const ExpectationFn& f_;
  const QuadConfig& q_;
  bool liberal_;
  VarSet root_live_;
  Valuation env_;
  std::vector<FrameNode> frames_;
  std::unordered_map<FrameKey, std::int64_t, FrameKeyHash> frame_ids_;
  std::vector<std::optional<std::vector<Symbol>>> live_;
  std::unordered_map<std::vector<std::uint64_t>, double, WordsHash> memo_;
  std::uint64_t leaves_ = 0;
};

std::size_t saturating_mul(std::size_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::size_t>::max() / b) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max()
                                                         : a + b;
}

double evaluate(const StmtPtr& c, const ExpectationFn& f, const State& sigma, const QuadConfig& q) {
  if (q.nodes == 0) throw std::invalid_argument("quadrature needs at least one node");
  if (!contains_only_core(*c)) throw std::invalid_argument("structural evaluation needs a desugared program");
  std::size_t nesting = draw_nesting(*c, q.max_depth);
  if (!q.memoize) {
    double projected = static_cast<double>(nesting) * std::log(static_cast<double>(q.nodes));
    if (projected > std::log(static_cast<double>(q.cost_ceiling))) {
      throw InfeasibleQuery(nesting, q.cost_ceiling);
    }
  }
  Evaluator ev(f, q, vars(*c));
  ev.nesting_hint_ = nesting;
  return ev.run(*c, sigma);
}

}  // namespace

std::size_t draw_nesting(const Stmt& c, std::uint64_t max_depth) {
  switch (c.kind) {
    case StmtKind::kDraw:
      return 1;
    case StmtKind::kSeq:
      return saturating_add(draw_nesting(*c.first, max_depth), draw_nesting(*c.second, max_depth));
    case StmtKind::kIf:
    case StmtKind::kFlipIf:
      return saturating_add(c.kind == StmtKind::kFlipIf ? 1 : 0,
                            std::max(draw_nesting(*c.first, max_depth),
                                     c.second ? draw_nesting(*c.second, max_depth) : 0));
    case StmtKind::kIfElse:
      return std::max(draw_nesting(*c.first, max_depth), draw_nesting(*c.second, max_depth));
    case StmtKind::kWhile:
      return saturating_mul(draw_nesting(*c.first, max_depth), max_depth);
    default:
      return 0;
  }
}

double wp(const StmtPtr& c, const ExpectationFn& f, const State& sigma, const QuadConfig& q) {
  if (q.mode != QuadMode::kWp) throw std::invalid_argument("wp called with a wlp configuration");
  return evaluate(c, f, sigma, q);
}

double wlp(const StmtPtr& c, const ExpectationFn& f, const State& sigma, const QuadConfig& q) {
  if (q.mode != QuadMode::kWlp) throw std::invalid_argument("wlp called with a wp configuration");
  if (!f.bound || *f.bound > 1.0) {
    throw std::invalid_argument("wlp needs a postexpectation bounded by 1");
  }
  return evaluate(c, f, sigma, q);
}

Bracket wp_bracket(const StmtPtr& c, const ExpectationFn& f, const State& sigma, QuadConfig q) {
  q.mode = QuadMode::kWp;
  double low = wp(c, f, sigma, q);
  q.mode = QuadMode::kWlp;
  return {low, wlp(c, f, sigma, q)};
}

}  // namespace preexp

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "preexp/runtime.hpp"
#include "preexp/syntax.hpp"

namespace preexp {

enum class QuadMode { kWp, kWlp };

struct QuadConfig {
  std::uint64_t nodes = 64;      // midpoint points per draw
  std::uint64_t max_depth = 64;  // Kleene iterations per loop entry
  QuadMode mode = QuadMode::kWp;
  bool memoize = true;
  std::uint64_t cost_ceiling = 100'000'000;  // leaf evaluations
};

/// Raised when a query would exceed the leaf-evaluation ceiling.
class InfeasibleQuery : public std::runtime_error {
 public:
  InfeasibleQuery(std::size_t nesting, std::uint64_t ceiling);
  std::size_t nesting() const { return nesting_; }

 private:
  std::size_t nesting_;
};

/// Variable valuation used during structural evaluation. Unbound reads are 0.
class Valuation {
 public:
  double get(Symbol x) const {
    auto id = x.id();
    return id < values_.size() ? values_[id] : 0.0;
  }
  bool bound(Symbol x) const {
    auto id = x.id();
    return id < bound_.size() && bound_[id];
  }
  void set(Symbol x, double v);
  void restore(Symbol x, double old_value, bool old_bound);
  void load(const State& s);
  State to_state() const;

 private:
  std::vector<double> values_;
  std::vector<std::uint8_t> bound_;
};

/// Postexpectation for structural evaluation. `reads`, when known, lets the
/// evaluator share work between states that agree on the relevant variables.
struct ExpectationFn {
  std::function<double(const Valuation&)> fn;
  std::optional<std::set<Symbol>> reads;
  std::optional<double> bound;

  static ExpectationFn from(const Postexpectation& f);
  static ExpectationFn constant(double v);
  static ExpectationFn from_state(std::function<double(const State&)> fn,
                                  std::optional<double> bound = std::nullopt);
};

/// wp[[C]](f)(sigma); loops contribute the max_depth-th Kleene iterate from 0.
double wp(const StmtPtr& c, const ExpectationFn& f, const State& sigma, const QuadConfig& q);
/// wlp[[C]](f)(sigma); loops contribute the max_depth-th iterate from 1.
double wlp(const StmtPtr& c, const ExpectationFn& f, const State& sigma, const QuadConfig& q);

struct Bracket {
  double low = 0.0;
  double high = 0.0;
};
/// (wp, wlp) at equal nodes and depth; q.mode is ignored.
Bracket wp_bracket(const StmtPtr& c, const ExpectationFn& f, const State& sigma, QuadConfig q);

/// Largest number of draws along one path, loops counted max_depth times.
std::size_t draw_nesting(const Stmt& c, std::uint64_t max_depth);

}  // namespace preexp

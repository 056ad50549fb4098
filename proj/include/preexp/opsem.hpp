// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "preexp/entropy.hpp"
#include "preexp/runtime.hpp"
#include "preexp/syntax.hpp"

namespace preexp::opsem {

/// A statement of the Machine's normalized program with its expression or
/// predicate precompiled.
struct Node {
  const Stmt* stmt = nullptr;
  StmtKind kind = StmtKind::kSkip;
  Symbol var;
  Compiled code;
  const Node* first = nullptr;
  const Node* second = nullptr;
};

/// A statement position: `head; tail` when tail is set, `head` alone
/// otherwise, and the terminated marker when head is null.
struct Frame {
  const Node* head = nullptr;
  const Node* tail = nullptr;

  bool done() const { return head == nullptr; }
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Machine configuration <theta, C, K, sigma, theta_K, n, w>.
struct Config {
  Entropy theta = Entropy::base(0);
  Frame stmt;
  std::vector<Frame> cont;
  bool error = false;  // state is the error state
  FlatState state;
  ContEntropy theta_k;
  std::uint64_t steps = 0;
  double weight = 1.0;
};

struct RunOutcome {
  enum class Kind { kTerminated, kErrored, kDiverged, kExhausted };

  Kind kind = Kind::kTerminated;
  State final_state;  // Terminated only
  double score = 0.0;
  std::uint64_t steps = 0;  // termination step, divergence detection step, or steps spent

  bool terminated() const { return kind == Kind::kTerminated; }
  /// O_C(theta) as an extended state; exhausted runs report divergence.
  ExtState final_ext() const;
};

/// Classification without materializing the final state.
struct RunSummary {
  RunOutcome::Kind kind = RunOutcome::Kind::kTerminated;
  double score = 0.0;
  std::uint64_t steps = 0;
};

const char* to_string(RunOutcome::Kind kind);

/// Stepper for one program. The program is right-normalized once up front;
/// that is equivalent to peeling the left-most statement of every sequence.
class Machine {
 public:
  explicit Machine(StmtPtr program);
  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  const StmtPtr& program() const { return program_; }

  Config initial(const State& sigma, Entropy theta) const;
  void reset(Config& c, const State& sigma, Entropy theta) const;

  /// Applies the unique applicable rule in place. Returns false (leaving c
  /// untouched) when no rule applies.
  bool step(Config& c) const;
  std::optional<Config> step_copy(const Config& c) const;

  RunOutcome run(const State& sigma, const Entropy& theta, std::uint64_t budget) const;
  /// As run, reusing `scratch`; the final state is left in scratch.state.
  RunSummary run_into(Config& scratch, const State& sigma, const Entropy& theta,
                      std::uint64_t budget) const;

  /// SC(theta, n): weight after exactly n steps, 0 if no such reduction
  /// with a proper state exists.
  double sc_at(const State& sigma, const Entropy& theta, std::uint64_t n) const;

 private:
  const Node* build(const StmtPtr& s);

  StmtPtr program_;
  std::deque<Node> nodes_;
  const Node* root_ = nullptr;
};

/// Continuation entropy used for empty initial continuations.
Entropy dummy_entropy(const Entropy& theta);

// Convenience wrappers building a Machine per call.
RunOutcome run(const StmtPtr& program, const State& sigma, const Entropy& theta,
               std::uint64_t budget);
double sc_at(const StmtPtr& program, const State& sigma, const Entropy& theta, std::uint64_t n);

}  // namespace preexp::opsem

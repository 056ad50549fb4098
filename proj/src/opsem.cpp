// SPDX-License-Identifier: Apache-2.0

#include "preexp/opsem.hpp"

namespace preexp::opsem {
namespace {

constexpr std::uint64_t kDummySalt = 0x6a09e667f3bcc909ULL;

}  // namespace

ExtState RunOutcome::final_ext() const {
  switch (kind) {
    case Kind::kTerminated:
      return ExtState::proper(final_state);
    case Kind::kErrored:
      return ExtState::error();
    default:
      return ExtState::diverged();
  }
}

const char* to_string(RunOutcome::Kind kind) {
  switch (kind) {
    case RunOutcome::Kind::kTerminated: return "terminated";
    case RunOutcome::Kind::kErrored: return "errored";
    case RunOutcome::Kind::kDiverged: return "diverged";
    case RunOutcome::Kind::kExhausted: return "exhausted";
  }
  return "?";
}

Entropy dummy_entropy(const Entropy& theta) {
  return Entropy::base((theta.is_base() ? theta.seed() : 0) ^ kDummySalt);
}

Machine::Machine(StmtPtr program) : program_(right_normalize(program)) {
  root_ = build(program_);
}

const Node* Machine::build(const StmtPtr& s) {
  Node& n = nodes_.emplace_back();
  n.stmt = s.get();
  n.kind = s->kind;
  n.var = s->var;
  if (s->expr) n.code = Compiled::expr(s->expr);
  if (s->pred) n.code = Compiled::pred(s->pred);
  if (s->first) n.first = build(s->first);
  if (s->second) n.second = build(s->second);
  return &n;
}

void Machine::reset(Config& c, const State& sigma, Entropy theta) const {
  c.theta_k = ContEntropy(dummy_entropy(theta));
  c.theta = std::move(theta);
  c.stmt = Frame{root_, nullptr};
  c.cont.clear();
  c.error = false;
  c.state.load(sigma);
  c.steps = 0;
  c.weight = 1.0;
}

Config Machine::initial(const State& sigma, Entropy theta) const {
  Config c;
  reset(c, sigma, std::move(theta));
  return c;
}

namespace {

// The rule table; shared by step and the run loop so the latter inlines it.
[[gnu::always_inline]] inline bool apply_rule(Config& c) {
  if (c.error) return false;
  const Node* head = c.stmt.head;

  if (head == nullptr) {
    if (c.cont.empty()) {  // (final)
      ++c.steps;
      return true;
    }
    // (pop)
    c.stmt = c.cont.back();
    c.cont.pop_back();
    c.theta_k.pop_left_into(c.theta);
    ++c.steps;
    return true;
  }

  if (c.stmt.tail != nullptr || head->kind == StmtKind::kSeq) {
    // (seq). The program is right-normalized, so the left operand of a Seq
    // is never itself a Seq.
    Frame rest = head->kind == StmtKind::kSeq ? Frame{head->second, c.stmt.tail}
                                              : Frame{c.stmt.tail, nullptr};
    c.stmt = Frame{head->kind == StmtKind::kSeq ? head->first : head, nullptr};
    c.cont.push_back(rest);
    c.theta_k.push_right_of(c.theta);
    c.theta.to_left();
    ++c.steps;
    return true;
  }

  switch (head->kind) {
    case StmtKind::kSkip:
      c.stmt = Frame{};
      break;
    case StmtKind::kDiverge:
      break;
    case StmtKind::kAssign:
      c.state.set(head->var, head->code.value(c.state));
      c.stmt = Frame{};
      break;
    case StmtKind::kDraw:
      c.state.set(head->var, c.theta.pi_l().pi_u());
      c.theta.to_right();
      c.stmt = Frame{};
      break;
    case StmtKind::kObserve:
      if (!head->code.holds(c.state)) {
        c.cont.clear();
        c.error = true;
      }
      c.stmt = Frame{};
      break;
    case StmtKind::kScore: {
      double v = head->code.value(c.state);
      if (!(v > 0.0 && v <= 1.0)) return false;
      c.weight *= v;
      c.stmt = Frame{};
      break;
    }
    case StmtKind::kIf:
      c.stmt = head->code.holds(c.state) ? Frame{head->first, nullptr} : Frame{};
      break;
    case StmtKind::kWhile:
      c.stmt = head->code.holds(c.state) ? Frame{head->first, head} : Frame{};
      break;
    default:
      // Sugar has no rule; callers desugar first.
      return false;
  }
  ++c.steps;
  return true;
}

}  // namespace

bool Machine::step(Config& c) const { return apply_rule(c); }

std::optional<Config> Machine::step_copy(const Config& c) const {
  Config next = c;
  if (!step(next)) return std::nullopt;
  return next;
}

RunSummary Machine::run_into(Config& c, const State& sigma, const Entropy& theta,
                             std::uint64_t budget) const {
  using Kind = RunOutcome::Kind;
  reset(c, sigma, theta);
  for (;;) {
    if (c.error) return {Kind::kErrored, 0.0, c.steps};
    const Node* head = c.stmt.head;
    if (head == nullptr) {
      if (c.cont.empty()) return {Kind::kTerminated, c.weight, c.steps};
    } else if (head->kind == StmtKind::kDiverge && c.stmt.tail == nullptr) {
      return {Kind::kDiverged, c.weight, c.steps};
    }
    if (c.steps >= budget) return {Kind::kExhausted, c.weight, c.steps};
    if (!apply_rule(c)) return {Kind::kErrored, 0.0, c.steps};
  }
}

RunOutcome Machine::run(const State& sigma, const Entropy& theta, std::uint64_t budget) const {
  Config c;
  RunSummary r = run_into(c, sigma, theta, budget);
  RunOutcome out{r.kind, {}, r.score, r.steps};
  if (r.kind == RunOutcome::Kind::kTerminated) out.final_state = c.state.to_state();
  return out;
}

double Machine::sc_at(const State& sigma, const Entropy& theta, std::uint64_t n) const {
  Config c = initial(sigma, theta);
  while (c.steps < n) {
    if (!step(c)) return 0.0;
  }
  return c.error ? 0.0 : c.weight;
}

RunOutcome run(const StmtPtr& program, const State& sigma, const Entropy& theta,
               std::uint64_t budget) {
  return Machine(program).run(sigma, theta, budget);
}

double sc_at(const StmtPtr& program, const State& sigma, const Entropy& theta, std::uint64_t n) {
  return Machine(program).sc_at(sigma, theta, n);
}

}  // namespace preexp::opsem

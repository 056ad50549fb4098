// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gen.hpp"
#include "preexp/opsem.hpp"

using namespace preexp;
using opsem::Machine;
using Kind = opsem::RunOutcome::Kind;

TEST_CASE("regression program replays with scripted draws") {
  Program p = testing::load_corpus("ex1.pl");
  double v = gaussian_cdf(0, 2, 2);
  auto r = opsem::run(p.body, {}, Entropy::scripted({0.5, v}), 1000);
  REQUIRE(r.kind == Kind::kTerminated);
  CHECK(r.steps == 16);
  CHECK(std::abs(r.score - std::exp(-1.0)) <= 1e-12);
  CHECK(r.final_state.get("a") == 0.0);
  CHECK(std::abs(r.final_state.get("b") - 2.0) <= 1e-9);
  CHECK(r.final_state.get("u1") == 0.5);
  CHECK(r.final_state.get("u2") == v);
}

TEST_CASE("loop program replays with a scripted draw") {
  Program p = testing::load_corpus("ex2.pl");
  auto r = opsem::run(p.body, {}, Entropy::scripted({0.1}), 1000);
  REQUIRE(r.kind == Kind::kTerminated);
  CHECK(r.steps == 21);
  CHECK(r.score == 0.5);
  CHECK(r.final_state == State{{"b", 1}, {"k", 1}, {"u", 0.1}});
}

TEST_CASE("score weight settles at one half") {
  Program p = testing::load_corpus("ex2.pl");
  Machine m(p.body);
  // Scripted entropy is consumed by each evaluation, so rebuild it per probe.
  auto sc = [&](std::uint64_t n) { return m.sc_at({}, Entropy::scripted({0.1}), n); };
  CHECK(sc(0) == 1.0);
  std::uint64_t first = 0;
  for (std::uint64_t n = 0; n <= 40; ++n) {
    double w = sc(n);
    CHECK((w == 1.0 || w == 0.5));
    if (w == 0.5 && first == 0) first = n;
    if (first != 0) CHECK(w == 0.5);
  }
  CHECK(first == 19);
}

TEST_CASE("draws read the base indices given by the entropy algebra") {
  Program p = testing::load_corpus("ex1.pl");
  for (std::uint64_t seed : {1u, 2u, 77u}) {
    auto r = opsem::run(p.body, {}, Entropy::base(seed), 1000);
    REQUIRE(r.terminated());
    // u1 sits at L.L and u2 at L.L.R.R after composing the (seq) splits
    // with the (pop) returns.
    CHECK(r.final_state.get("u1") == unit_interval(hash_index(seed, 0)));
    CHECK(r.final_state.get("u2") == unit_interval(hash_index(seed, 3)));
    CHECK(r.final_state.get("u1") == Entropy::base(seed).pi_l().pi_l().pi_u());
  }
}

TEST_CASE("simple programs") {
  auto run = [](const std::string& src, std::uint64_t budget = 1000) {
    return opsem::run(desugar(parse(src)).body, {}, Entropy::base(3), budget);
  };
  auto skip = run("skip");
  CHECK(skip.kind == Kind::kTerminated);
  CHECK(skip.final_state == State{});
  CHECK(run("diverge").kind == Kind::kDiverged);
  CHECK(run("x := 1; diverge").kind == Kind::kDiverged);
  CHECK(run("while (true) { skip }", 500).kind == Kind::kExhausted);
  auto err = run("x := 1; observe(x = 2); x := 3");
  CHECK(err.kind == Kind::kErrored);
  CHECK(err.score == 0.0);
  auto stuck = run("score(2)");
  CHECK(stuck.kind == Kind::kErrored);
  CHECK(run("score(0)").kind == Kind::kErrored);
  auto ok = run("score(0.25); score(0.5)");
  CHECK(ok.kind == Kind::kTerminated);
  CHECK(ok.score == 0.125);
  auto loop = run("i := 0; while (i < 3) { i := i + 1 }");
  REQUIRE(loop.terminated());
  CHECK(loop.final_state.get("i") == 3);
}

TEST_CASE("exhausted runs report the in-flight weight") {
  Program p = testing::load_corpus("limit_score.pl");
  auto r = opsem::run(p.body, {}, Entropy::base(1), 100);
  CHECK(r.kind == Kind::kExhausted);
  CHECK(r.steps == 100);
  CHECK(r.score > 0.5);
  CHECK(r.score < 1.0);
}

TEST_CASE("step is deterministic and the weight is antitone and positive") {
  testing::GenOptions opts;
  opts.loops = true;
  opts.wild_scores = true;
  testing::ProgramGen gen(31, opts);
  for (int i = 0; i < 1000; ++i) {
    Machine m(gen.program());
    opsem::Config c = m.initial({}, Entropy::base(i));
    double w = c.weight;
    for (int n = 0; n < 400; ++n) {
      auto a = m.step_copy(c);
      auto b = m.step_copy(c);
      REQUIRE(a.has_value() == b.has_value());
      if (!a) break;
      REQUIRE(a->stmt == b->stmt);
      REQUIRE(a->state.to_state() == b->state.to_state());
      REQUIRE(a->weight == b->weight);
      REQUIRE(a->steps == c.steps + 1);
      REQUIRE(a->weight <= w);
      REQUIRE(a->weight > 0.0);
      w = a->weight;
      c = std::move(*a);
    }
  }
}

TEST_CASE("sc_at is antitone in the step count") {
  testing::GenOptions opts;
  opts.loops = true;
  testing::ProgramGen gen(37, opts);
  for (int i = 0; i < 1000; ++i) {
    Machine m(gen.program());
    double prev = m.sc_at({}, Entropy::base(i), 0);
    REQUIRE(prev == 1.0);
    for (std::uint64_t n = 1; n < 60; n += 3) {
      double w = m.sc_at({}, Entropy::base(i), n);
      REQUIRE(w <= prev);
      prev = w;
    }
  }
}

TEST_CASE("sequencing decomposes over the entropy halves") {
  testing::GenOptions opts;
  opts.wild_scores = true;
  testing::ProgramGen gen(41, opts);
  std::size_t terminated = 0, errored = 0;
  for (int i = 0; i < 1000; ++i) {
    StmtPtr c1 = gen.program();
    // The first component must not be a sequence.
    if (c1->kind == StmtKind::kSeq) c1 = ast::if_then(ast::truth(true), c1);
    StmtPtr c2 = gen.program();
    Entropy theta = Entropy::base(1000 + i);
    State sigma{{"x", 1}};

    auto whole = opsem::run(ast::seq(c1, c2), sigma, theta, 100000);
    auto first = opsem::run(c1, sigma, theta.pi_l(), 100000);
    if (first.kind == Kind::kErrored) {
      REQUIRE(whole.kind == Kind::kErrored);
      ++errored;
      continue;
    }
    REQUIRE(first.kind == Kind::kTerminated);
    // Continue from O1 with the first run's weight so the score products
    // associate the same way as in the combined run.
    Machine m2(c2);
    opsem::Config c = m2.initial(first.final_state, theta.pi_r());
    c.weight = first.score;
    while (!c.error && !(c.stmt.done() && c.cont.empty()) && m2.step(c)) {
    }
    if (c.error || !c.stmt.done()) {
      REQUIRE(whole.kind == Kind::kErrored);
      ++errored;
      continue;
    }
    REQUIRE(whole.kind == Kind::kTerminated);
    ++terminated;
    REQUIRE(whole.final_state == c.state.to_state());
    REQUIRE(whole.score == c.weight);
  }
  CHECK(terminated > 200);
  CHECK(errored > 50);
}

TEST_CASE("machine reuse matches fresh runs") {
  Program p = testing::load_corpus("ex2.pl");
  Machine m(p.body);
  opsem::Config scratch;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto fresh = m.run({}, Entropy::base(s), 5000);
    auto reused = m.run_into(scratch, {}, Entropy::base(s), 5000);
    REQUIRE(fresh.kind == reused.kind);
    REQUIRE(fresh.score == reused.score);
    REQUIRE(fresh.steps == reused.steps);
    if (fresh.terminated()) REQUIRE(fresh.final_state == scratch.state.to_state());
  }
}

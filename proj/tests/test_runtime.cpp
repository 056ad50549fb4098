// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gen.hpp"
#include "preexp/runtime.hpp"

using namespace preexp;

TEST_CASE("update is functional") {
  State empty;
  State a = update(empty, Symbol("x"), 1);
  CHECK(empty.size() == 0);
  CHECK(a.get("x") == 1);
  State b = update(a, Symbol("x"), 2);
  CHECK(a.get("x") == 1);
  CHECK(b.get("x") == 2);
  State c = update(a, Symbol("y"), 3);
  CHECK(c == State{{"x", 1}, {"y", 3}});
  CHECK(a == State{{"x", 1}});
}

TEST_CASE("states coerce non-finite values and read unbound as zero") {
  State s;
  s.set(Symbol("x"), std::numeric_limits<double>::infinity());
  s.set(Symbol("y"), std::nan(""));
  CHECK(s.get("x") == 0);
  CHECK(s.get("y") == 0);
  CHECK(s.get("never") == 0);
  CHECK_FALSE(s.contains(Symbol("never")));

  FlatState f;
  f.load(s);
  f.set(Symbol("x"), -std::numeric_limits<double>::infinity());
  f.set(Symbol("w"), 4);
  CHECK(f.get(Symbol("x")) == 0);
  CHECK(f.to_state() == State{{"x", 0}, {"y", 0}, {"w", 4}});
}

TEST_CASE("JSON state round trip") {
  State s{{"b", 2.5}, {"a", -1}};
  std::string text = to_json(s);
  CHECK(text == R"({"a":-1.0,"b":2.5})");
  CHECK(state_from_json(text) == s);
  CHECK(state_from_json("{}") == State{});
  CHECK_THROWS_AS(state_from_json("[1]"), std::invalid_argument);
  CHECK_THROWS_AS(state_from_json(R"({"a":"x"})"), std::invalid_argument);
  CHECK_THROWS_AS(state_from_json("{"), std::invalid_argument);
}

TEST_CASE("expression totality") {
  State s{{"x", 3}};
  CHECK(eval_expr(s, *parse_expr("x / 0")) == 0);
  CHECK(eval_expr(s, *parse_expr("1e308 * 10")) == 0);
  CHECK(eval_expr(s, *parse_expr("1e308 + 1e308")) == 0);
  CHECK(eval_expr(s, *parse_expr("gaussian_inv_cdf(0, 2, 0.5)")) == 0);
  CHECK(eval_expr(s, *parse_expr("gaussian_inv_cdf(1, 2, 0)")) == 0);
  CHECK(eval_expr(s, *parse_expr("gaussian_inv_cdf(1, 2, 1)")) == 0);
  CHECK(eval_expr(s, *parse_expr("gaussian_pdf(0, 0, 1)")) == 0);
  CHECK(eval_expr(s, *parse_expr("softeq(x, x)")) == 1);
}

TEST_CASE("gaussian helpers") {
  // Standard-deviation convention.
  CHECK(gaussian_pdf(0, 2, 0) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi))));
  CHECK(gaussian_cdf(0, 2, 2) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(gaussian_inv_cdf(0, 2, 0.8413447460685429) == doctest::Approx(2).epsilon(1e-12));
  CHECK(softeq(1, 3) == doctest::Approx(std::exp(-4.0)));
}

TEST_CASE("inverse cdf round trip") {
  for (double mu : {0.0, -3.0, 5.0}) {
    for (double s : {0.5, 1.0, 2.0, 10.0}) {
      for (int i = 0; i <= 1200; ++i) {
        double x = mu - 6 * s + 12 * s * i / 1200.0;
        double p = gaussian_cdf(mu, s, x);
        double back = gaussian_inv_cdf(mu, s, p);
        // Rounding p to a double moves the preimage by up to half an ulp of p
        // divided by the density; the rest is the approximation budget.
        double ulp = std::nextafter(p, 2.0) - p;
        double conditioning = 0.5 * ulp / gaussian_pdf(mu, s, x);
        INFO("mu=", mu, " s=", s, " x=", x);
        REQUIRE(std::abs(back - x) <= 1e-9 + conditioning + 4 * std::numeric_limits<double>::epsilon() * std::abs(x));
      }
    }
  }
}

TEST_CASE("evaluation fuzz: no NaN, compiled form agrees") {
  testing::GenOptions opts;
  opts.wide_literals = true;
  testing::ProgramGen gen(23, opts);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> wide(-1e300, 1e300), narrow(-5, 5);
  for (int i = 0; i < 20000; ++i) {
    ExprPtr e = gen.expr(4);
    PredPtr p = gen.pred(2);
    State s;
    for (const char* v : {"x", "y", "z", "u0", "u1"}) {
      if (gen.pick(5) == 0) continue;
      s.set(Symbol(v), gen.pick(4) == 0 ? wide(rng) : narrow(rng));
    }
    double v = eval_expr(s, *e);
    REQUIRE(std::isfinite(v));
    FlatState f;
    f.load(s);
    double cv = Compiled::expr(e).value(f);
    REQUIRE(std::isfinite(cv));
    REQUIRE(((cv == v) || (std::isnan(cv) && std::isnan(v))));
    REQUIRE(Compiled::pred(p).holds(f) == eval_pred(s, *p));
  }
}

TEST_CASE("deep expressions fall back to tree evaluation") {
  ExprPtr e = ast::lit(1);
  for (int i = 0; i < 200; ++i) e = ast::add(ast::lit(1), e);
  State s;
  CHECK(eval_expr(s, *e) == 201);
  FlatState f;
  CHECK(Compiled::expr(e).value(f) == 201);
}

TEST_CASE("postexpectations clamp") {
  State s{{"a", -2}, {"b", 3}};
  auto f = Postexpectation::parse("a * a", 1.0);
  CHECK(f(s) == 1.0);
  auto g = Postexpectation::parse("a");
  CHECK(g(s) == 0.0);
  auto h = Postexpectation::parse("b");
  CHECK(h(s) == 3.0);
  CHECK(Postexpectation::parse("b", 1.0).hat(ExtState::diverged()) == 0.0);
  CHECK(Postexpectation::parse("b", 1.0).check(ExtState::diverged()) == 1.0);
  CHECK(Postexpectation::parse("b", 1.0).check(ExtState::error()) == 0.0);
  CHECK(Postexpectation::constant(0.5).hat(ExtState::proper(s)) == 0.5);
}

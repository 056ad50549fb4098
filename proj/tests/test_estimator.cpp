// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#include "gen.hpp"
#include "preexp/estimator.hpp"
#include "preexp/transform.hpp"
#include "preexp/wpeval.hpp"

using namespace preexp;

namespace {

StmtPtr core(const std::string& src) { return desugar(parse(src)).body; }

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool bit_equal(const Estimate& a, const Estimate& b) {
  return bit_equal(a.mean, b.mean) && bit_equal(a.std_error, b.std_error) && a.samples == b.samples &&
         a.counts == b.counts;
}

}  // namespace

TEST_CASE("exact sums ignore order") {
  std::mt19937_64 rng(1);
  std::vector<double> xs;
  for (int i = 0; i < 5000; ++i) {
    double m = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng), static_cast<int>(rng() % 80) - 40);
    xs.push_back(m);
  }
  ExactSum forward, backward, split_a, split_b;
  for (double x : xs) forward.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) backward.add(*it);
  for (std::size_t i = 0; i < xs.size(); ++i) (i % 3 ? split_a : split_b).add(xs[i]);
  split_b.add(split_a);
  CHECK(bit_equal(forward.value(), backward.value()));
  CHECK(bit_equal(forward.value(), split_b.value()));

  ExactSum cancel;
  cancel.add(1e100);
  cancel.add(1.0);
  cancel.add(-1e100);
  CHECK(cancel.value() == 1.0);
  ExactSum tenths;
  for (int i = 0; i < 10; ++i) tenths.add(0.1);
  CHECK(tenths.value() == 1.0);
}

TEST_CASE("estimates are reproducible across thread counts") {
  Program p = testing::load_corpus("ex2.pl");
  Postexpectation f = Postexpectation::parse("k / 8", 1.0);
  EstimatorConfig one{20'000, 3, 2000, 1};
  EstimatorConfig many{20'000, 3, 2000, 3};
  JointEstimate a = estimate_joint(p.body, f, {}, one);
  JointEstimate b = estimate_joint(p.body, f, {}, one);
  JointEstimate c = estimate_joint(p.body, f, {}, many);
  CHECK(bit_equal(a.wp, b.wp));
  CHECK(bit_equal(a.wp, c.wp));
  CHECK(bit_equal(*a.wlp, *c.wlp));
  CHECK(bit_equal(a.divergence, c.divergence));
  CHECK(bit_equal(a.normalizer, c.normalizer));
  CHECK(bit_equal(a.wp_normalizer_cov, c.wp_normalizer_cov));
}

TEST_CASE("partition, sandwich and the divergence identity") {
  testing::GenOptions opts;
  opts.loops = true;
  opts.wild_scores = true;
  testing::ProgramGen gen(81, opts);
  for (int i = 0; i < 60; ++i) {
    StmtPtr c = unfold_while(gen.program(), 3);
    EstimatorConfig cfg{2000, static_cast<std::uint64_t>(i) * 10'000, 10'000, 1};
    JointEstimate j = estimate_joint(c, Postexpectation::parse("1 / (1 + x * x)", 1.0), {}, cfg);
    CHECK(j.wp.counts.total() == cfg.samples);
    CHECK(j.wp.counts.exhausted == 0);
    CHECK(j.sandwich_violations == 0);
    CHECK(j.wp.mean <= j.wlp->mean);
    CHECK(j.identity_residual == 0.0);
    // The normalizer is wlp(1), which splits into wp(1) and divergence mass.
    JointEstimate one = estimate_joint(c, Postexpectation::constant(1.0, 1.0), {}, cfg);
    CHECK(bit_equal(one.normalizer.mean, one.wlp->mean));
  }
}

TEST_CASE("raw loops report exhausted runs as bounds") {
  Program p = testing::load_corpus("limit_score.pl");
  EstimatorConfig cfg{200, 1, 1000, 1};
  JointEstimate j = estimate_joint(p.body, Postexpectation::constant(1.0, 1.0), {}, cfg);
  CHECK(j.wp.counts.exhausted == 200);
  CHECK(j.wp.is_bound());
  CHECK(j.wp.mean == 0.0);
  CHECK(j.divergence.mean > 0.5);
  CHECK(j.divergence.std_error == 0.0);
}

TEST_CASE("standard error is the sample deviation over root n") {
  StmtPtr c = core("x :~ U; if (x < 0.25) { score(0.5) }");
  EstimatorConfig cfg{10'000, 1, 100, 1};
  Estimate e = estimate_wp(c, Postexpectation::constant(1.0, 1.0), {}, cfg);
  // Mean of 0.5 * [x < 1/4] + [x >= 1/4] is 7/8; its variance is 3/64.
  CHECK(std::abs(e.mean - 0.875) <= 4 * std::sqrt(3.0 / 64 / 10'000));
  CHECK(e.std_error == doctest::Approx(std::sqrt(3.0 / 64 / 10'000)).epsilon(0.05));
}

TEST_CASE("agreement with quadrature on small programs") {
  testing::GenOptions opts;
  opts.max_draws = 2;
  testing::ProgramGen gen(83, opts);
  int passed = 0;
  const int total = 20;
  for (int i = 0; i < total; ++i) {
    StmtPtr c = gen.program();
    Postexpectation f = Postexpectation::parse("1 / (1 + y * y)", 1.0);
    EstimatorConfig cfg{50'000, 100'000ull * i, 1000, 1};
    Estimate e = estimate_wp(c, f, {}, cfg);
    QuadConfig q;
    q.nodes = 256;
    double w = wp(c, ExpectationFn::from(f), {}, q);
    passed += std::abs(e.mean - w) <= 3 * e.std_error + 3.0 / q.nodes;
  }
  CHECK(passed >= total - 2);
}

TEST_CASE("posterior with shared runs") {
  StmtPtr c = core("x :~ U; score(x)");
  // Posterior mean of x under density 2x is 2/3.
  EstimatorConfig cfg{100'000, 1, 100, 1};
  Estimate e = estimate_posterior(c, Postexpectation::parse("x"), {}, cfg);
  CHECK(std::abs(e.mean - 2.0 / 3) <= 4 * e.std_error);
  CHECK(e.std_error > 0.0);
  CHECK(e.mode == EstimateMode::kPosterior);
  CHECK_THROWS_AS(estimate_posterior(core("observe(false)"), Postexpectation::constant(1.0), {}, cfg),
                  VanishingNormalizer);
}

TEST_CASE("argument validation") {
  EstimatorConfig cfg{0, 1, 100, 1};
  CHECK_THROWS_AS(estimate_wp(core("skip"), Postexpectation::constant(1.0), {}, cfg), std::invalid_argument);
  cfg.samples = 10;
  CHECK_THROWS_AS(estimate_wlp(core("skip"), Postexpectation::parse("x"), {}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(estimate_wp(parse("if (flip(0.5)) { skip }"), Postexpectation::constant(1.0), {}, cfg),
                  std::invalid_argument);
}

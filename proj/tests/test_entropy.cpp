// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "preexp/entropy.hpp"

using namespace preexp;

namespace {

// A projection word read left to right; 'L' and 'R' select halves.
Entropy walk(Entropy e, const std::string& word) {
  for (char c : word) e = c == 'L' ? e.pi_l() : e.pi_r();
  return e;
}

std::string random_word(std::mt19937_64& rng, std::size_t max_len) {
  std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w += (rng() & 1) ? 'R' : 'L';
  return w;
}

// Independent oracle for the base stream index of a projection word: the
// Hilbert cube takes even coordinates on the left and odd ones on the right.
std::uint64_t word_index(const std::string& word, std::uint64_t i) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) i = 2 * i + (*it == 'R' ? 1 : 0);
  return i;
}

}  // namespace

TEST_CASE("base streams read hashed coordinates") {
  Entropy t = Entropy::base(42);
  CHECK(t.pi_u() == unit_interval(hash_index(42, 0)));
  CHECK(t.element(5) == unit_interval(hash_index(42, 5)));
  CHECK(t.pi_u() >= 0.0);
  CHECK(t.pi_u() < 1.0);
}

TEST_CASE("projection words map to the predicted base index") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::string w = random_word(rng, 20);
    Entropy e = walk(Entropy::base(9), w);
    INFO(w);
    CHECK(e.base_index(0) == word_index(w, 0));
    CHECK(e.base_index(3) == word_index(w, 3));
    CHECK(e.pi_u() == unit_interval(hash_index(9, word_index(w, 0))));
  }
}

TEST_CASE("in-place projections agree with the copying ones") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    std::string w = random_word(rng, 140);
    Entropy a = walk(Entropy::base(11), w);
    Entropy b = Entropy::base(11);
    for (char c : w) c == 'L' ? b.to_left() : b.to_right();
    CHECK(a.pi_u() == b.pi_u());
    CHECK(a.pi_r().pi_u() == b.pi_r().pi_u());
  }
}

TEST_CASE("pair projections are exact") {
  Entropy a = Entropy::base(1).pi_r();
  Entropy b = Entropy::base(2);
  Entropy p = Entropy::pair(a, b);
  CHECK(p.pi_u() == a.pi_u());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    std::string w = random_word(rng, 30);
    CHECK(walk(p.pi_l(), w).pi_u() == walk(a, w).pi_u());
    CHECK(walk(p.pi_r(), w).pi_u() == walk(b, w).pi_u());
  }
}

TEST_CASE("pairing the two halves reproduces the original stream") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    Entropy t = Entropy::base(rng());
    // Deep first so the words cross the fold depth.
    t = walk(t, random_word(rng, 40));
    Entropy p = Entropy::pair(t.pi_l(), t.pi_r());
    std::string w = random_word(rng, 80);
    INFO(w);
    REQUIRE(walk(p, w).pi_u() == walk(t, w).pi_u());
  }
}

TEST_CASE("pair elements interleave") {
  Entropy a = Entropy::base(7), b = Entropy::base(8);
  Entropy p = Entropy::pair(a, b);
  for (std::uint64_t i = 0; i < 10; ++i) {
    CHECK(p.element(2 * i) == a.element(i));
    CHECK(p.element(2 * i + 1) == b.element(i));
  }
}

TEST_CASE("scripted entropy pops in program order through any projection") {
  Entropy s = Entropy::scripted({0.1, 0.2, 0.3});
  CHECK(s.pi_l().pi_u() == 0.1);
  CHECK(s.pi_r().pi_l().pi_u() == 0.2);
  Entropy paired = Entropy::pair(s.pi_r(), s.pi_l());
  CHECK(paired.pi_u() == 0.3);
  CHECK(s.scripted_remaining() == 0);
  CHECK_THROWS_AS(s.pi_u(), EntropyExhausted);
}

TEST_CASE("continuation entropy behaves like nested pairs") {
  Entropy tail = Entropy::base(21);
  ContEntropy k(tail);
  Entropy a = Entropy::base(1), b = Entropy::base(2);
  k.push(a);
  k.push(b);
  Entropy m = k.materialize();
  CHECK(m.pi_l().pi_u() == b.pi_u());
  CHECK(m.pi_r().pi_l().pi_u() == a.pi_u());
  CHECK(m.pi_r().pi_r().pi_u() == tail.pi_u());
  CHECK(k.pop_left().pi_u() == b.pi_u());
  CHECK(k.pop_left().pi_u() == a.pi_u());
  CHECK(k.pop_left().pi_u() == tail.pi_l().pi_u());
  CHECK(k.left().pi_u() == tail.pi_r().pi_l().pi_u());
}

TEST_CASE("uniformity: Kolmogorov-Smirnov") {
  const std::size_t n = 10'000;
  std::vector<double> xs;
  for (std::uint64_t s = 1; s <= n; ++s) xs.push_back(Entropy::base(s).pi_l().pi_u());
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - xs[i], xs[i] - static_cast<double>(i) / n));
  }
  // Asymptotic 1% critical value.
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("independence: left and right halves are uncorrelated") {
  const std::size_t n = 100'000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::uint64_t s = 1; s <= n; ++s) {
    Entropy t = Entropy::base(s);
    double x = t.pi_l().pi_u(), y = t.pi_r().pi_u();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  double mx = sx / n, my = sy / n;
  double cov = sxy / n - mx * my;
  double r = cov / std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
  CHECK(std::abs(r) < 0.02);
}

TEST_CASE("shuffles preserve the distribution of projected draws") {
  // Reassociation (L.L, (R.L, R)) of the halves.
  auto psi = [](const Entropy& t) {
    return Entropy::pair(t.pi_l().pi_l(), Entropy::pair(t.pi_l().pi_r(), t.pi_r()));
  };
  auto phi = [](const Entropy& t) { return Entropy::pair(t.pi_l(), t.pi_r()); };
  const std::size_t n = 100'000;
  for (const char* word : {"L", "RL", "RRL"}) {
    for (double c : {0.2, 0.5, 0.9}) {
      double d1 = 0, d1sq = 0, d2 = 0, d2sq = 0;
      for (std::uint64_t s = 1; s <= n; ++s) {
        Entropy t = Entropy::base(s);
        // Independent base seeds for the reference integral.
        Entropy ref = Entropy::base(s + 10'000'000);
        double g0 = walk(ref, word).pi_u() < c;
        double a = walk(psi(t), word).pi_u() < c;
        double b = walk(phi(t), word).pi_u() < c;
        d1 += a - g0;
        d1sq += (a - g0) * (a - g0);
        d2 += b - g0;
        d2sq += (b - g0) * (b - g0);
      }
      auto within = [&](double sum, double sq) {
        double mean = sum / n;
        double se = std::sqrt((sq / n - mean * mean) / n);
        return std::abs(mean) <= 3 * se;
      };
      INFO(word, " c=", c);
      CHECK(within(d1, d1sq));
      CHECK(within(d2, d2sq));
    }
  }
}

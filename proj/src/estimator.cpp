// SPDX-License-Identifier: Apache-2.0

#include "preexp/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "preexp/entropy.hpp"
#include "preexp/opsem.hpp"

namespace preexp {

const char* to_string(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::kWp: return "wp";
    case EstimateMode::kWlp: return "wlp";
    case EstimateMode::kDivergence: return "divergence";
    case EstimateMode::kPosterior: return "posterior";
  }
  return "?";
}

namespace {

std::string describe(double mean, double se) {
  std::ostringstream out;
  out << "normalizing constant " << mean << " is within 3 standard errors (" << se << ") of zero";
  return out.str();
}

}  // namespace

VanishingNormalizer::VanishingNormalizer(double mean, double std_error)
    : std::runtime_error(describe(mean, std_error)) {}

// Shewchuk's non-overlapping partials, finished with round-half-even as in
// Python's math.fsum.
void ExactSum::add(double x) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < partials_.size(); ++j) {
    double y = partials_[j];
    if (std::abs(x) < std::abs(y)) std::swap(x, y);
    double hi = x + y;
    double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::add(const ExactSum& other) {
  for (double p : other.partials_) add(p);
}

double ExactSum::value() const {
  if (partials_.empty()) return 0.0;
  std::size_t n = partials_.size() - 1;
  double hi = partials_[n];
  double lo = 0.0;
  while (n > 0) {
    double x = hi;
    double y = partials_[--n];
    hi = x + y;
    double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    double y = lo * 2.0;
    double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

namespace {

constexpr std::uint64_t kChunk = 4096;

// Welford moments with Chan's pairwise combination.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    double total = n + o.n;
    double d = o.mean - mean;
    m2 += o.m2 + d * d * n * o.n / total;
    mean += d * o.n / total;
    n = total;
  }
  double variance() const { return n > 1.0 ? std::max(0.0, m2 / (n - 1.0)) : 0.0; }
};

struct CoMoments {
  double n = 0.0, mx = 0.0, my = 0.0, c = 0.0;

  void add(double x, double y) {
    n += 1.0;
    double dx = x - mx;
    mx += dx / n;
    my += (y - my) / n;
    c += dx * (y - my);
  }
  void merge(const CoMoments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    double total = n + o.n;
    double dx = o.mx - mx, dy = o.my - my;
    c += o.c + dx * dy * n * o.n / total;
    mx += dx * o.n / total;
    my += dy * o.n / total;
    n = total;
  }
  double covariance() const { return n > 1.0 ? c / (n - 1.0) : 0.0; }
};

struct Series {
  ExactSum sum;
  Moments moments;

  void add(double x) {
    sum.add(x);
    moments.add(x);
  }
  void merge(const Series& o) {
    sum.add(o.sum);
    moments.merge(o.moments);
  }
};

struct Accumulator {
  Series wp, wlp, divergence, normalizer;
  CoMoments wp_norm;
  ExactSum residual;
  RunCounts counts;
  std::uint64_t violations = 0;

  void merge(const Accumulator& o) {
    wp.merge(o.wp);
    wlp.merge(o.wlp);
    divergence.merge(o.divergence);
    normalizer.merge(o.normalizer);
    wp_norm.merge(o.wp_norm);
    residual.add(o.residual);
    counts.terminated += o.counts.terminated;
    counts.errored += o.counts.errored;
    counts.diverged += o.counts.diverged;
    counts.exhausted += o.counts.exhausted;
    violations += o.violations;
  }
};

Estimate finish(const Series& s, std::uint64_t samples, const RunCounts& counts, EstimateMode mode) {
  Estimate e;
  e.samples = samples;
  e.counts = counts;
  e.mode = mode;
  if (samples == 0) return e;
  double n = static_cast<double>(samples);
  e.mean = s.sum.value() / n;
  e.std_error = std::sqrt(s.moments.variance() / n);
  return e;
}

void run_chunk(const opsem::Machine& machine, const Postexpectation& f, bool bounded,
               const State& sigma, const EstimatorConfig& cfg, std::uint64_t begin,
               std::uint64_t end, opsem::Config& scratch, Accumulator& acc) {
  using Kind = opsem::RunOutcome::Kind;
  for (std::uint64_t i = begin; i < end; ++i) {
    auto r = machine.run_into(scratch, sigma, Entropy::base(cfg.seed + i), cfg.budget);
    double wp = 0.0, wp1 = 0.0, wlp = 0.0, div = 0.0, norm = 0.0;
    switch (r.kind) {
      case Kind::kTerminated: {
        ++acc.counts.terminated;
        double fv = f(scratch.state);
        wp = fv * r.score;
        wp1 = r.score;
        wlp = bounded ? wp : 0.0;
        norm = r.score;
        break;
      }
      case Kind::kErrored:
        ++acc.counts.errored;
        break;
      case Kind::kDiverged:
      case Kind::kExhausted:
        ++(r.kind == Kind::kDiverged ? acc.counts.diverged : acc.counts.exhausted);
        wlp = r.score;
        div = r.score;
        norm = r.score;
        break;
    }
    acc.wp.add(wp);
    if (bounded) acc.wlp.add(wlp);
    acc.divergence.add(div);
    acc.normalizer.add(norm);
    acc.wp_norm.add(wp, norm);
    acc.residual.add(norm);
    acc.residual.add(-wp1);
    acc.residual.add(-div);
    if (bounded && wp > wlp) ++acc.violations;
  }
}

}  // namespace

JointEstimate estimate_joint(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                             const EstimatorConfig& cfg) {
  if (cfg.samples == 0) throw std::invalid_argument("estimation needs at least one sample");
  if (!contains_only_core(*c)) throw std::invalid_argument("estimation needs a desugared program");
  const opsem::Machine machine(c);
  const bool bounded = f.bound && *f.bound <= 1.0;

  const std::uint64_t chunks = (cfg.samples + kChunk - 1) / kChunk;
  std::vector<Accumulator> partial(chunks);
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));

  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    opsem::Config scratch;
    for (;;) {
      std::uint64_t k = next.fetch_add(1);
      if (k >= chunks) return;
      std::uint64_t begin = k * kChunk;
      std::uint64_t end = std::min(cfg.samples, begin + kChunk);
      run_chunk(machine, f, bounded, sigma, cfg, begin, end, scratch, partial[k]);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  Accumulator acc;
  for (const auto& p : partial) acc.merge(p);

  JointEstimate out;
  out.wp = finish(acc.wp, cfg.samples, acc.counts, EstimateMode::kWp);
  if (bounded) out.wlp = finish(acc.wlp, cfg.samples, acc.counts, EstimateMode::kWlp);
  out.divergence = finish(acc.divergence, cfg.samples, acc.counts, EstimateMode::kDivergence);
  out.normalizer = finish(acc.normalizer, cfg.samples, acc.counts, EstimateMode::kWlp);
  out.wp_normalizer_cov = acc.wp_norm.covariance();
  out.identity_residual = acc.residual.value();
  out.sandwich_violations = acc.violations;
  return out;
}

Estimate estimate_wp(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                     const EstimatorConfig& cfg) {
  return estimate_joint(c, f, sigma, cfg).wp;
}

Estimate estimate_wlp(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                      const EstimatorConfig& cfg) {
  if (!f.bound || *f.bound > 1.0) {
    throw std::invalid_argument("wlp needs a postexpectation bounded by 1");
  }
  return *estimate_joint(c, f, sigma, cfg).wlp;
}

Estimate estimate_divergence_mass(const StmtPtr& c, const State& sigma, const EstimatorConfig& cfg) {
  return estimate_joint(c, Postexpectation::constant(1.0, 1.0), sigma, cfg).divergence;
}

Estimate posterior_from(const JointEstimate& joint) {
  const Estimate& x = joint.wp;
  const Estimate& y = joint.normalizer;
  if (!(y.mean > 3.0 * y.std_error) || y.mean <= 0.0) throw VanishingNormalizer(y.mean, y.std_error);
  Estimate e;
  e.mode = EstimateMode::kPosterior;
  e.samples = x.samples;
  e.counts = x.counts;
  e.mean = x.mean / y.mean;
  // Delta method on the ratio of two correlated means.
  double n = static_cast<double>(x.samples);
  double var_x = x.std_error * x.std_error * n;
  double var_y = y.std_error * y.std_error * n;
  double r = e.mean;
  double v = (var_x - 2.0 * r * joint.wp_normalizer_cov + r * r * var_y) / (y.mean * y.mean * n);
  e.std_error = std::sqrt(std::max(0.0, v));
  return e;
}

Estimate estimate_posterior(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                            const EstimatorConfig& cfg) {
  return posterior_from(estimate_joint(c, f, sigma, cfg));
}

}  // namespace preexp

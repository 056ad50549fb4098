// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "preexp/runtime.hpp"
#include "preexp/syntax.hpp"

namespace preexp {

enum class EstimateMode { kWp, kWlp, kDivergence, kPosterior };

const char* to_string(EstimateMode mode);

struct RunCounts {
  std::uint64_t terminated = 0;
  std::uint64_t errored = 0;
  std::uint64_t diverged = 0;
  std::uint64_t exhausted = 0;

  std::uint64_t total() const { return terminated + errored + diverged + exhausted; }
  friend bool operator==(const RunCounts&, const RunCounts&) = default;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  RunCounts counts;
  EstimateMode mode = EstimateMode::kWp;

  /// Exhausted runs make the mean a one-sided bound rather than a point value.
  bool is_bound() const { return counts.exhausted > 0; }
};

struct EstimatorConfig {
  std::uint64_t samples = 10'000;
  std::uint64_t seed = 1;
  std::uint64_t budget = 10'000;
  unsigned threads = 0;  // 0 selects the hardware concurrency
};

class VanishingNormalizer : public std::runtime_error {
 public:
  VanishingNormalizer(double mean, double std_error);
};

/// Correctly rounded floating-point sum, independent of summation order.
class ExactSum {
 public:
  void add(double x);
  void add(const ExactSum& other);
  double value() const;

 private:
  std::vector<double> partials_;
};

/// All queries over one shared set of runs. Run i uses entropy base(seed + i).
struct JointEstimate {
  Estimate wp;                  // f-hat * SC
  std::optional<Estimate> wlp;  // f-check * SC; present when f is bounded by 1
  Estimate divergence;          // [O = diverged] * SC, exhausted runs included
  Estimate normalizer;          // SC, i.e. f-check * SC with f = 1
  double wp_normalizer_cov = 0.0;  // sample covariance of the wp and normalizer terms
  /// Exact sum over runs of normalizer - wp1 - divergence, where wp1 is the
  /// wp term for f = 1.
  double identity_residual = 0.0;
  /// Runs where f-hat * SC > f-check * SC; always 0 for f bounded by 1.
  std::uint64_t sandwich_violations = 0;
};

JointEstimate estimate_joint(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                             const EstimatorConfig& cfg);

Estimate estimate_wp(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                     const EstimatorConfig& cfg);
/// Requires f.bound <= 1.
Estimate estimate_wlp(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                      const EstimatorConfig& cfg);
Estimate estimate_divergence_mass(const StmtPtr& c, const State& sigma, const EstimatorConfig& cfg);
/// wp(f) / wlp(1) on shared runs with a delta-method standard error. Throws
/// VanishingNormalizer when wlp(1) is within 3 standard errors of 0.
Estimate estimate_posterior(const StmtPtr& c, const Postexpectation& f, const State& sigma,
                            const EstimatorConfig& cfg);
Estimate posterior_from(const JointEstimate& joint);

}  // namespace preexp

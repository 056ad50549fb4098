// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "preexp/runtime.hpp"

namespace preexp {
namespace {

// Acklam's rational approximation of the standard normal quantile.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                         1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                         6.680131188771720e+01,  -1.328068155833054e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                         -2.549671010336536e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                         3.754408661907416e+00};
constexpr double kLow = 0.02425;

double acklam(double p) {
  if (p < kLow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  if (p > 1.0 - kLow) {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

}  // namespace

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) return 0.0;
  // Upper half by symmetry; 1 - p is exact there and erfc stays accurate.
  if (p > 0.5) return -standard_normal_quantile(1.0 - p);
  double x = acklam(p);
  // One Halley step against the erfc-based cdf.
  double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double gaussian_cdf(double mu, double sigma, double x) {
  if (!(sigma > 0.0)) return x < mu ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

double gaussian_inv_cdf(double mu, double sigma, double u) {
  if (std::isnan(u) || u <= 0.0 || u >= 1.0) return 0.0;
  return finite_or_zero(mu + sigma * standard_normal_quantile(u));
}

double gaussian_pdf(double mu, double sigma, double x) {
  if (!(sigma > 0.0)) return 0.0;
  double z = (mu - x) / sigma;
  return finite_or_zero(std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma));
}

double softeq(double a, double b) {
  double d = a - b;
  return finite_or_zero(std::exp(-d * d));
}

}  // namespace preexp

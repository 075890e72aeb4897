#pragma once

#include <cmath>

#include "fdrsafe/types.hpp"

namespace fdrsafe {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;

inline double norm_pdf(double x, double sigma = 1.0) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * kSqrt2Pi);
}

inline double norm_log_pdf(double x, double sigma = 1.0) {
  const double z = x / sigma;
  return -0.5 * z * z - std::log(sigma * kSqrt2Pi);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Upper tail 1 - Phi(x), accurate for large x.
inline double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double norm_quantile(double p);

// Two-sided p-value 2*(1 - F(|u|)) under the given null, clamped to
// [1e-300, 1] so downstream log/probit transforms stay finite.
double two_sided_pvalue(double u, const NullSpec& null_spec);

}  // namespace fdrsafe

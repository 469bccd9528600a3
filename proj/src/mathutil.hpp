#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace co3 {

// Probabilities are floored at this value before taking logarithms.
inline constexpr double kProbFloor = 1e-300;

inline constexpr double kLogTwoPi = 1.8378770664093454836;

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double log_norm_pdf(double x) { return -0.5 * (kLogTwoPi + x * x); }

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal survival function 1 - Phi(x); well conditioned for x >> 0.
inline double norm_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

/// Standard normal quantile (inverse CDF), Wichura's AS 241 (PPND16).
double norm_quantile(double p);

inline double log_add_exp(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(std::span<const double> v);

/// log of the ascending factorial (a)_n = a(a+1)...(a+n-1).
inline double log_ascending_factorial(double a, int n) {
  return std::lgamma(a + n) - std::lgamma(a);
}

}  // namespace co3

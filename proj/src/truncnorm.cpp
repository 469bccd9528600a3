#include "truncnorm.hpp"

#include <cmath>
#include <stdexcept>

#include "mathutil.hpp"

namespace co3 {

namespace {

constexpr double kTailCut = 5.0;

// Standard normal truncated to (a, b] with a >= kTailCut.
double sample_upper_tail(double a, double b, Rng& rng) {
  if ((b - a) * a < 0.5) {
    // Narrow far-tail interval: uniform proposal, density bound at a.
    for (;;) {
      const double x = rng.uniform(a, b);
      if (std::log(rng.uniform()) <= 0.5 * (a * a - x * x)) return x;
    }
  }
  // Robert's shifted-exponential proposal, rejecting past b.
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a + rng.exponential() / lambda;
    if (x > b) continue;
    const double d = x - lambda;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
  }
}

// Standard normal truncated to (a, b] via inverse CDF, working in the
// better-conditioned half of the distribution.
double sample_central(double a, double b, Rng& rng) {
  if (a + b > 0.0) {
    // Work with survival probabilities (upper half).
    const double qa = std::isinf(a) ? 1.0 : norm_sf(a);
    const double qb = std::isinf(b) ? 0.0 : norm_sf(b);
    const double q = qb + rng.uniform() * (qa - qb);
    return -norm_quantile(q);
  }
  const double pa = std::isinf(a) ? 0.0 : norm_cdf(a);
  const double pb = std::isinf(b) ? 1.0 : norm_cdf(b);
  const double u = pa + rng.uniform() * (pb - pa);
  return norm_quantile(u);
}

}  // namespace

double sample_truncnorm(double mean, double var, double lo, double hi, Rng& rng) {
  if (!(var > 0.0)) throw std::invalid_argument("sample_truncnorm: var must be positive");
  if (!(lo < hi)) throw std::invalid_argument("sample_truncnorm: need lo < hi");
  const double sd = std::sqrt(var);
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;

  double x;
  if (std::isinf(a) && std::isinf(b)) {
    x = rng.normal();
  } else if (a >= kTailCut) {
    x = sample_upper_tail(a, b, rng);
  } else if (b <= -kTailCut) {
    x = -sample_upper_tail(-b, -a, rng);
  } else {
    x = sample_central(a, b, rng);
  }
  return mean + sd * x;
}

}  // namespace co3

#include "dp_prior.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "mathutil.hpp"

namespace co3 {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_eppf(double alpha, const std::vector<int>& sizes) {
  if (alpha <= 0.0) throw std::invalid_argument("log_eppf: alpha must be positive");
  if (sizes.empty()) throw std::invalid_argument("log_eppf: sizes must be nonempty");
  int total = 0;
  double log_prod = 0.0;
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("log_eppf: sizes must be >= 1");
    total += s;
    log_prod += std::lgamma(static_cast<double>(s));  // log (s-1)!
  }
  const double k = static_cast<double>(sizes.size());
  return k * std::log(alpha) - log_ascending_factorial(alpha, total) + log_prod;
}

namespace {

// Row n of log |s(n, .)|, index k in 0..n; rows built bottom-up and cached.
const std::vector<double>& stirling_row(int n) {
  static std::mutex mu;
  static std::unordered_map<int, std::vector<double>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> row{0.0};  // |s(0,0)| = 1
  for (int m = 1; m <= n; ++m) {
    std::vector<double> next(m + 1, kNegInf);
    // |s(m,k)| = (m-1) |s(m-1,k)| + |s(m-1,k-1)|
    const double log_m1 = m > 1 ? std::log(static_cast<double>(m - 1)) : kNegInf;
    for (int k = 1; k <= m; ++k) {
      const double carry = k <= m - 1 ? log_m1 + row[k] : kNegInf;
      const double step = row[k - 1];
      next[k] = log_add_exp(carry, step);
    }
    row = std::move(next);
  }
  return cache.emplace(n, std::move(row)).first->second;
}

}  // namespace

double log_stirling1_unsigned(int n, int k) {
  if (n < 1 || k < 1 || k > n)
    throw std::invalid_argument("log_stirling1_unsigned: need 1 <= k <= n");
  return stirling_row(n)[k];
}

double BivariateClusterPrior::expectation() const {
  double e = 0.0;
  for (const auto& [k, prob] : pmf) e += static_cast<double>(k) * prob;
  return e;
}

BivariateClusterPrior prior_k_pmf(int n, int p, double alpha1, double alpha2) {
  if (n < 1 || p < 1) throw std::invalid_argument("prior_k_pmf: n, p must be >= 1");
  if (alpha1 <= 0.0 || alpha2 <= 0.0)
    throw std::invalid_argument("prior_k_pmf: concentrations must be positive");

  // log Pr(k_n = i) = i log a1 + log|s(n,i)| - log (a1)_n, same for columns.
  const double log_norm1 = log_ascending_factorial(alpha1, n);
  const double log_norm2 = log_ascending_factorial(alpha2, p);
  std::vector<double> log_rows(n + 1), log_cols(p + 1);
  for (int i = 1; i <= n; ++i)
    log_rows[i] = i * std::log(alpha1) + log_stirling1_unsigned(n, i) - log_norm1;
  for (int j = 1; j <= p; ++j)
    log_cols[j] = j * std::log(alpha2) + log_stirling1_unsigned(p, j) - log_norm2;

  std::map<long long, double> acc;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= p; ++j) {
      const long long prod = static_cast<long long>(i) * j;
      const double term = std::exp(log_rows[i] + log_cols[j]);
      acc[prod] += term;
    }
  }

  BivariateClusterPrior prior;
  prior.n = n;
  prior.p = p;
  prior.alpha1 = alpha1;
  prior.alpha2 = alpha2;
  prior.pmf = std::move(acc);
  return prior;
}

double expected_k(int n, int p, double alpha1, double alpha2) {
  if (n < 1 || p < 1) throw std::invalid_argument("expected_k: n, p must be >= 1");
  double sum1 = 0.0, sum2 = 0.0;
  for (int i = 1; i <= n; ++i) sum1 += 1.0 / (alpha1 + i - 1);
  for (int j = 1; j <= p; ++j) sum2 += 1.0 / (alpha2 + j - 1);
  return alpha1 * alpha2 * sum1 * sum2;
}

std::vector<int> sample_crp_sizes(int n, double alpha, Rng& rng) {
  std::vector<int> sizes;
  for (int i = 0; i < n; ++i) {
    const double total = alpha + i;
    double u = rng.uniform() * total;
    bool placed = false;
    for (int& s : sizes) {
      if (u < s) {
        ++s;
        placed = true;
        break;
      }
      u -= s;
    }
    if (!placed) sizes.push_back(1);
  }
  return sizes;
}

std::map<long long, double> simulate_crp_bivariate(int n, int p, double alpha1,
                                                   double alpha2, int draws,
                                                   std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("simulate_crp_bivariate: draws must be >= 1");
  Rng rng(seed);
  std::map<long long, double> counts;
  for (int t = 0; t < draws; ++t) {
    const auto rows = sample_crp_sizes(n, alpha1, rng);
    const auto cols = sample_crp_sizes(p, alpha2, rng);
    counts[static_cast<long long>(rows.size()) * cols.size()] += 1.0;
  }
  for (auto& [k, v] : counts) v /= draws;
  return counts;
}

}  // namespace co3

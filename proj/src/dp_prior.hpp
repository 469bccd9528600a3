#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rng.hpp"

namespace co3 {

/// log EPPF of the Dirichlet process with concentration alpha for a
/// partition with the given block sizes:
///   log[ alpha^k / (alpha)_N * prod (n_l - 1)! ].
double log_eppf(double alpha, const std::vector<int>& sizes);

/// log of the unsigned Stirling number of the first kind |s(n,k)|.
/// Rows are memoized behind a lock; computed in log space.
double log_stirling1_unsigned(int n, int k);

/// Prior pmf of the number of bivariate clusters k = k_n * k_p under two
/// independent DPs.
struct BivariateClusterPrior {
  int n = 0, p = 0;
  double alpha1 = 1.0, alpha2 = 1.0;
  std::map<long long, double> pmf;  // product value -> probability

  double expectation() const;
};

BivariateClusterPrior prior_k_pmf(int n, int p, double alpha1, double alpha2);

/// E[k] = alpha1 alpha2 sum_i 1/(alpha1+i-1) sum_j 1/(alpha2+j-1).
double expected_k(int n, int p, double alpha1, double alpha2);

/// One Chinese-restaurant-process partition; returns per-cluster sizes.
std::vector<int> sample_crp_sizes(int n, double alpha, Rng& rng);

/// Monte-Carlo estimate of the bivariate cluster-count pmf.
std::map<long long, double> simulate_crp_bivariate(int n, int p, double alpha1,
                                                   double alpha2, int draws,
                                                   std::uint64_t seed);

}  // namespace co3

#pragma once

#include "rng.hpp"

namespace co3 {

/// Draw from N(mean, var) restricted to (lo, hi]; lo/hi may be infinite.
/// Inverse CDF in the central regime, exponential rejection (Robert) or
/// uniform rejection in tails beyond 5 sigma.
double sample_truncnorm(double mean, double var, double lo, double hi, Rng& rng);

}  // namespace co3

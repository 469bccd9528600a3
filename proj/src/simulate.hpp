#pragma once

#include <cstdint>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace co3 {

enum class CensorMode { informative, random };

struct ScenarioConfig {
  int n = 50, p = 50;
  int c = 3;
  int d = 3;
  int row_components = 3, col_components = 3;
  double separation = 2.5;
  double censor_rate = 0.05;
  CensorMode censor_mode = CensorMode::informative;
  int target_category = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct FactorDraw {
  std::vector<Eigen::MatrixXd> factors;  // count d x 2 matrices
  std::vector<int> labels;               // component of each factor
};

/// Mixture factors: component means on a deterministic separation-scaled
/// simplex grid, N(0, 0.1 I) jitter per column, balanced labels shuffled.
FactorDraw generate_factors(int k_components, int count, int d, double separation,
                            Rng& rng);

/// Mean of component m among k on the grid used by generate_factors: for
/// k <= d the vertices of a centered regular simplex scaled to length
/// `separation` (pairwise dot products -separation^2/(k-1), so factor
/// products span both signs); a signed coordinate grid otherwise.
Eigen::VectorXd component_mean(int m, int k, int d, double separation);

struct Simulation {
  Dataset data;
  std::vector<int> row_truth, col_truth;
  Eigen::MatrixXd z, w;  // generating latents, kept for testing
  int censored = 0;
  int requested_censored = 0;
};

/// Data generated under the model: x_ij ~ N2(theta1_i' theta2_j,
/// diag(0.1, 1.5)), y from z via the default cutoffs, then censoring
/// applied by the configured mechanism. Informative censoring draws
/// uniformly among entries whose y equals the target category; if those
/// run out the simulation reports the smaller censored count.
Simulation generate_dataset(const ScenarioConfig& sc);

}  // namespace co3

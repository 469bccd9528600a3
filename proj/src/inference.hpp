#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gibbs.hpp"

namespace co3 {

/// Posterior co-clustering probabilities; symmetric with unit diagonal.
struct SimilarityMatrix {
  int N = 0;
  Eigen::MatrixXd s;
};

SimilarityMatrix posterior_similarity(const std::vector<std::vector<int>>& draws);

/// Wade-Ghahramani Jensen bound on the posterior expected VI, up to the
/// candidate-independent term; smaller is better.
double vi_objective(const std::vector<int>& labels, const Eigen::MatrixXd& s);

/// Point-estimate partition: the complete-linkage dendrogram cut (on
/// distance 1-s) minimizing vi_objective; ties go to fewer clusters.
std::vector<int> vi_point_estimate(const SimilarityMatrix& sim);

double ari(const std::vector<int>& a, const std::vector<int>& b);

/// ARI between the bivariate partitions of the n*p cells induced by row
/// and column partitions, computed through the product structure of the
/// contingency table (no materialization).
double bari(const std::vector<int>& rows_a, const std::vector<int>& cols_a,
            const std::vector<int>& rows_b, const std::vector<int>& cols_b);

/// LPML = sum_ij log CPO_ij with CPO the harmonic mean of per-draw
/// entry likelihoods.
double lpml(const std::vector<Eigen::MatrixXd>& per_entry_likelihood_draws);
double lpml(const ChainOutput& chain);

struct LpmlReport {
  std::vector<int> d;
  std::vector<double> value;
  std::vector<bool> ok;
  int best_d = -1;
};

/// Runs one chain per latent dimension (u_l11 = u_l22 = 1/sqrt(d)
/// re-derived per d, disjoint seeds) and reports LPML across the grid.
/// Failed dimensions are flagged, not fatal.
LpmlReport select_d(const Dataset& data, const Cutoffs& cutoffs,
                    const ModelConfig& config_template, const std::vector<int>& d_grid,
                    const GibbsControls& controls);

}  // namespace co3

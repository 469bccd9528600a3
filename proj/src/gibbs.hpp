#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace co3 {

struct GibbsControls {
  int iterations = 5000;
  int burn_in = -1;  // -1: iterations / 2
  int thin = 1;
  std::uint64_t seed = 1;
  bool parallel_latent = false;
  int threads = 1;
  bool low_memory = false;

  int effective_burn_in() const { return burn_in < 0 ? iterations / 2 : burn_in; }
  void validate() const;
};

/// Log weights of one generalized Polya-urn draw: the new-cluster option
/// and one weight per existing distinct value. Normalization happens at
/// sampling time via log-sum-exp.
struct UrnWeights {
  double log_w0 = 0.0;
  std::vector<double> log_w;
};

/// Identifies the per-entry RNG streams of one sweep; z/w updates draw
/// from counter-derived streams keyed by (seed, iteration, i, j) so that
/// serial and parallel execution produce identical states.
struct SweepContext {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  int threads = 1;
};

/// Quantities that stay fixed while one axis's assignments are updated:
/// expanded other-axis factors, base-measure precisions and their
/// factorizations.
struct AxisCache {
  Eigen::MatrixXd other1, other2;  // d x m expanded other-axis columns
  Eigen::MatrixXd AAt1, AAt2;      // other_r * other_r^T
  Eigen::LLT<Eigen::MatrixXd> chol1, chol2;  // of P_r = AAt_r/sigma_r^2 + (u_r V)^-1
  double logdet_P1 = 0.0, logdet_P2 = 0.0;
  Eigen::MatrixXd Vinv;
  Eigen::VectorXd S0inv_m1, S0inv_m2;  // (u_r V)^-1 m_r
  double prior_quad1 = 0.0, prior_quad2 = 0.0;
  double logdet_S0_1 = 0.0, logdet_S0_2 = 0.0;
  double u_1 = 1.0, u_2 = 1.0;
  Eigen::VectorXd m_1, m_2;
  double alpha = 1.0;
  int count = 0;  // items on this axis
  int m = 0;      // likelihood terms per item (other-axis length)
  double sigma1_sq = 1.0, sigma2_sq = 1.0;
};

AxisCache make_row_cache(const LatentState& state, const ModelConfig& config);
AxisCache make_col_cache(const LatentState& state, const ModelConfig& config);

/// d x count matrix whose i-th column is the factor column r of item i.
Eigen::MatrixXd expand_factors(const std::vector<Eigen::MatrixXd>& distinct,
                               const std::vector<int>& labels, int r);

/// n x p matrix of factorized means theta1_i^(r) . theta2_j^(r).
Eigen::MatrixXd factor_means(const LatentState& state, int r);

LatentState init_state(const Dataset& data, const Cutoffs& cutoffs,
                       const ModelConfig& config, Rng& rng);

/// Full conditional draw of every z entry: truncated to the observed
/// category's cell when observed, untruncated otherwise.
void update_z(LatentState& state, const Dataset& data, const Cutoffs& cutoffs,
              const SweepContext& ctx);

/// Full conditional draw of every w entry: truncated to [0,inf) when
/// observed, (-inf,0) otherwise.
void update_w(LatentState& state, const Dataset& data, const SweepContext& ctx);

/// Urn weights for row i. Precondition: the state excludes item i's
/// assignment (label -1, leave-one-out counts).
UrnWeights urn_weights_row(int i, const LatentState& state, const Dataset& data,
                           const ModelConfig& config);
UrnWeights urn_weights_col(int j, const LatentState& state, const Dataset& data,
                           const ModelConfig& config);
UrnWeights urn_weights_row_cached(int i, const LatentState& state, const AxisCache& cache);
UrnWeights urn_weights_col_cached(int j, const LatentState& state, const AxisCache& cache);

/// Draw of a new distinct value from the conjugate posterior given item
/// i's latent rows; pairs with the urn's new-cluster weight.
Eigen::MatrixXd sample_base_row(int i, const LatentState& state, const Dataset& data,
                                const ModelConfig& config, Rng& rng);
Eigen::MatrixXd sample_base_col(int j, const LatentState& state, const Dataset& data,
                                const ModelConfig& config, Rng& rng);

/// Draw a d x 2 value from the base measure H (columns independent).
Eigen::MatrixXd sample_prior_value(const Eigen::MatrixXd& M, double u_1, double u_2,
                                   const Eigen::MatrixXd& V, Rng& rng);

/// Conjugate-posterior column draw given A (d x m), data vector y (m),
/// noise variance, prior precision Vinv/u and prior mean m0. With m = 0
/// this reduces to a draw from the prior.
Eigen::VectorXd sample_column_posterior(const Eigen::MatrixXd& A,
                                        const Eigen::VectorXd& y, double sigma_sq,
                                        const Eigen::MatrixXd& Vinv_over_u,
                                        const Eigen::VectorXd& prior_mean, Rng& rng);

void detach_row(LatentState& state, int i);
void detach_col(LatentState& state, int j);

/// One urn pass over all items of an axis.
void update_row_assignments(LatentState& state, const Dataset& data,
                            const ModelConfig& config, Rng& rng);
void update_col_assignments(LatentState& state, const Dataset& data,
                            const ModelConfig& config, Rng& rng);

/// Redraw every distinct value from its full conditional (reshuffling).
void reshuffle_rows(LatentState& state, const ModelConfig& config, Rng& rng);
void reshuffle_cols(LatentState& state, const ModelConfig& config, Rng& rng);

/// Inverse-gamma full conditionals for sigma1^2/sigma2^2; no-op when the
/// configuration fixes them.
void update_sigmas(LatentState& state, const ModelConfig& config, Rng& rng);

/// One full sweep: urns for all rows and columns, reshuffles, z/w
/// updates, variance update.
void gibbs_sweep(LatentState& state, const Dataset& data, const Cutoffs& cutoffs,
                 const ModelConfig& config, Rng& rng, const SweepContext& ctx);

/// Stored post-burn-in draws of one chain.
struct ChainOutput {
  int n = 0, p = 0;
  std::vector<std::vector<int>> row_draws, col_draws;  // canonical labels
  std::vector<double> sigma1_draws, sigma2_draws;
  std::vector<int> kn_draws, kp_draws;
  std::vector<Eigen::MatrixXd> like_draws;  // per-entry likelihoods (unless low_memory)
  Eigen::MatrixXd neg_log_like_lse;  // streaming logsumexp of -log L per entry
  int stored = 0;
  bool valid = true;
  std::string failure;
  int failed_iteration = -1;
};

ChainOutput run_chain(const Dataset& data, const Cutoffs& cutoffs,
                      const ModelConfig& config, const GibbsControls& controls);

}  // namespace co3

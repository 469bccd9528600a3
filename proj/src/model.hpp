#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace co3 {

/// Thrown when a linear-algebra step degenerates (non-PD precision etc.).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordinal thresholds: gamma[0] = -inf < gamma[1] < ... < gamma[c] = +inf.
struct Cutoffs {
  std::vector<double> gamma;

  int categories() const { return static_cast<int>(gamma.size()) - 1; }
  double lower(int y) const { return gamma[y - 1]; }
  double upper(int y) const { return gamma[y]; }
  /// Category of a latent value: the k with gamma[k-1] < z <= gamma[k].
  int category_of(double z) const;
};

/// Equispaced cutoffs symmetric about zero: gamma_k = k - c/2, k = 1..c-1.
Cutoffs make_default_cutoffs(int c);

/// Cutoffs from c-1 strictly increasing finite interior values.
Cutoffs make_cutoffs(const std::vector<double>& interior);

/// n x p ordinal matrix with censoring indicators. Censored cells carry a
/// zero sentinel in y and are never read.
struct Dataset {
  int n = 0, p = 0, c = 0;
  std::vector<int> y;                 // row-major, codes in 1..c where observed
  std::vector<std::uint8_t> delta;    // row-major, 1 = observed

  int code(int i, int j) const { return y[static_cast<std::size_t>(i) * p + j]; }
  bool observed(int i, int j) const {
    return delta[static_cast<std::size_t>(i) * p + j] != 0;
  }

  /// Validates invariants; throws std::invalid_argument naming the first
  /// offending cell.
  static Dataset create(int n, int p, int c, std::vector<int> y,
                        std::vector<std::uint8_t> delta);
};

struct SigmaHyperprior {
  double shape1 = 2.0, rate1 = 1.0;
  double shape2 = 2.0, rate2 = 1.0;
};

/// Hyperparameters of the two DPs and their matrix-normal base measures.
/// The column covariances U_l are structurally diagonal, so only the two
/// diagonal entries per side are stored.
struct ModelConfig {
  int d = 3;
  double alpha1 = 1.0, alpha2 = 1.0;
  Eigen::MatrixXd M1, M2;  // d x 2 base means
  double u1_11 = 0.0, u1_22 = 0.0;  // diag(U_1)
  double u2_11 = 0.0, u2_22 = 0.0;  // diag(U_2)
  Eigen::MatrixXd V1, V2;  // d x d SPD row covariances
  bool sigma_fixed = true;
  double sigma1_sq = 0.1, sigma2_sq = 1.5;  // fixed values, or initial values
  SigmaHyperprior sigma_prior;

  /// Simulation-study defaults: alpha = 1, M = 0, V = I, u = 1/sqrt(d),
  /// sigma fixed at (0.1, 1.5).
  static ModelConfig defaults(int d);

  void validate() const;
};

/// All augmented variables of one MCMC state.
struct LatentState {
  Eigen::MatrixXd z, w;  // n x p
  std::vector<int> row_labels;  // indices into theta1
  std::vector<int> col_labels;  // indices into theta2
  std::vector<Eigen::MatrixXd> theta1;  // k_n distinct d x 2 values
  std::vector<Eigen::MatrixXd> theta2;  // k_p distinct d x 2 values
  std::vector<int> row_counts, col_counts;
  double sigma1_sq = 0.1, sigma2_sq = 1.5;

  int kn() const { return static_cast<int>(theta1.size()); }
  int kp() const { return static_cast<int>(theta2.size()); }
};

/// Throws std::logic_error on any violated state invariant: empty clusters,
/// label/count mismatches, or z/w outside their truncation cells.
void validate_state(const LatentState& state, const Dataset& data,
                    const Cutoffs& cutoffs);

/// Likelihood of one (y, delta) cell given the factorized latent means.
/// Observed: Pr(z in category cell) * Pr(w >= 0); censored: Pr(w < 0).
/// The result is floored at kProbFloor so logarithms are always finite.
double entry_likelihood(int y, bool observed, double mz, double mw,
                        double sigma1_sq, double sigma2_sq,
                        const Cutoffs& cutoffs);

/// Relabels clusters into first-use order starting at 0.
std::vector<int> canonical_labels(const std::vector<int>& labels);

int num_clusters(const std::vector<int>& labels);

}  // namespace co3

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mathutil.hpp"

namespace co3 {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int Cutoffs::category_of(double z) const {
  const int c = categories();
  for (int k = 1; k < c; ++k)
    if (z <= gamma[k]) return k;
  return c;
}

Cutoffs make_default_cutoffs(int c) {
  if (c < 2) throw std::invalid_argument("make_default_cutoffs: c must be >= 2");
  Cutoffs cut;
  cut.gamma.resize(c + 1);
  cut.gamma[0] = -kInf;
  for (int k = 1; k < c; ++k) cut.gamma[k] = k - c / 2.0;
  cut.gamma[c] = kInf;
  return cut;
}

Cutoffs make_cutoffs(const std::vector<double>& interior) {
  if (interior.empty())
    throw std::invalid_argument("make_cutoffs: need at least one interior cutoff");
  for (std::size_t k = 0; k < interior.size(); ++k) {
    if (!std::isfinite(interior[k]))
      throw std::invalid_argument("make_cutoffs: interior cutoffs must be finite");
    if (k > 0 && interior[k] <= interior[k - 1])
      throw std::invalid_argument("make_cutoffs: cutoffs must be strictly increasing");
  }
  Cutoffs cut;
  cut.gamma.reserve(interior.size() + 2);
  cut.gamma.push_back(-kInf);
  cut.gamma.insert(cut.gamma.end(), interior.begin(), interior.end());
  cut.gamma.push_back(kInf);
  return cut;
}

Dataset Dataset::create(int n, int p, int c, std::vector<int> y,
                        std::vector<std::uint8_t> delta) {
  if (n < 1 || p < 1) throw std::invalid_argument("Dataset: n and p must be >= 1");
  if (c < 2) throw std::invalid_argument("Dataset: c must be >= 2");
  const std::size_t np = static_cast<std::size_t>(n) * p;
  if (y.size() != np || delta.size() != np)
    throw std::invalid_argument("Dataset: y/delta size mismatch");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * p + j;
      if (delta[idx] > 1)
        throw std::invalid_argument("Dataset: delta must be 0/1 at row " +
                                    std::to_string(i + 1) + ", column " +
                                    std::to_string(j + 1));
      if (delta[idx] == 1 && (y[idx] < 1 || y[idx] > c))
        throw std::invalid_argument(
            "Dataset: observed code outside 1..c at row " + std::to_string(i + 1) +
            ", column " + std::to_string(j + 1));
      if (delta[idx] == 0) y[idx] = 0;  // sentinel, never read
    }
  }
  Dataset ds;
  ds.n = n;
  ds.p = p;
  ds.c = c;
  ds.y = std::move(y);
  ds.delta = std::move(delta);
  return ds;
}

ModelConfig ModelConfig::defaults(int d) {
  ModelConfig cfg;
  cfg.d = d;
  cfg.M1 = Eigen::MatrixXd::Zero(d, 2);
  cfg.M2 = Eigen::MatrixXd::Zero(d, 2);
  const double u = 1.0 / std::sqrt(static_cast<double>(d));
  cfg.u1_11 = cfg.u1_22 = cfg.u2_11 = cfg.u2_22 = u;
  cfg.V1 = Eigen::MatrixXd::Identity(d, d);
  cfg.V2 = Eigen::MatrixXd::Identity(d, d);
  return cfg;
}

void ModelConfig::validate() const {
  if (d < 1) throw std::invalid_argument("ModelConfig: d must be >= 1");
  if (alpha1 <= 0.0 || alpha2 <= 0.0)
    throw std::invalid_argument("ModelConfig: concentrations must be positive");
  if (u1_11 <= 0.0 || u1_22 <= 0.0 || u2_11 <= 0.0 || u2_22 <= 0.0)
    throw std::invalid_argument("ModelConfig: U diagonals must be positive");
  if (sigma1_sq <= 0.0 || sigma2_sq <= 0.0)
    throw std::invalid_argument("ModelConfig: sigma^2 must be positive");
  if (!sigma_fixed) {
    if (sigma_prior.shape1 <= 0.0 || sigma_prior.rate1 <= 0.0 ||
        sigma_prior.shape2 <= 0.0 || sigma_prior.rate2 <= 0.0)
      throw std::invalid_argument("ModelConfig: IG hyperprior parameters must be positive");
  }
  if (M1.rows() != d || M1.cols() != 2 || M2.rows() != d || M2.cols() != 2)
    throw std::invalid_argument("ModelConfig: M must be d x 2");
  if (V1.rows() != d || V1.cols() != d || V2.rows() != d || V2.cols() != d)
    throw std::invalid_argument("ModelConfig: V must be d x d");
  for (const auto* V : {&V1, &V2}) {
    if (!V->isApprox(V->transpose(), 1e-12))
      throw std::invalid_argument("ModelConfig: V must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(*V);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("ModelConfig: V must be positive definite");
  }
}

void validate_state(const LatentState& state, const Dataset& data,
                    const Cutoffs& cutoffs) {
  auto fail = [](const std::string& what) { throw std::logic_error("LatentState: " + what); };

  const int n = data.n, p = data.p;
  if (state.z.rows() != n || state.z.cols() != p || state.w.rows() != n ||
      state.w.cols() != p)
    fail("z/w dimensions do not match the data");
  if (static_cast<int>(state.row_labels.size()) != n ||
      static_cast<int>(state.col_labels.size()) != p)
    fail("label vector lengths do not match the data");
  const int kn = state.kn(), kp = state.kp();
  if (kn < 1 || kn > n || kp < 1 || kp > p) fail("cluster counts out of range");
  if (static_cast<int>(state.row_counts.size()) != kn ||
      static_cast<int>(state.col_counts.size()) != kp)
    fail("count vector lengths do not match distinct values");

  std::vector<int> rc(kn, 0), cc(kp, 0);
  for (int lab : state.row_labels) {
    if (lab < 0 || lab >= kn) fail("row label out of range");
    ++rc[lab];
  }
  for (int lab : state.col_labels) {
    if (lab < 0 || lab >= kp) fail("column label out of range");
    ++cc[lab];
  }
  for (int l = 0; l < kn; ++l)
    if (rc[l] == 0 || rc[l] != state.row_counts[l]) fail("row cluster empty or count stale");
  for (int l = 0; l < kp; ++l)
    if (cc[l] == 0 || cc[l] != state.col_counts[l]) fail("column cluster empty or count stale");

  if (!(state.sigma1_sq > 0.0) || !(state.sigma2_sq > 0.0)) fail("sigma^2 not positive");

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      if (data.observed(i, j)) {
        const int y = data.code(i, j);
        if (!(state.z(i, j) > cutoffs.lower(y) && state.z(i, j) <= cutoffs.upper(y)))
          fail("z outside its category cell at (" + std::to_string(i) + "," +
               std::to_string(j) + ")");
        if (!(state.w(i, j) >= 0.0)) fail("w negative at an observed cell");
      } else if (!(state.w(i, j) < 0.0)) {
        fail("w non-negative at a censored cell");
      }
    }
  }
}

double entry_likelihood(int y, bool observed, double mz, double mw,
                        double sigma1_sq, double sigma2_sq,
                        const Cutoffs& cutoffs) {
  if (sigma1_sq <= 0.0 || sigma2_sq <= 0.0)
    throw std::invalid_argument("entry_likelihood: variances must be positive");
  const double s2 = std::sqrt(sigma2_sq);
  if (!observed) {
    const double v = norm_cdf(-mw / s2);
    return v < kProbFloor ? kProbFloor : v;
  }
  const int c = cutoffs.categories();
  if (y < 1 || y > c)
    throw std::invalid_argument("entry_likelihood: observed code outside 1..c");
  const double s1 = std::sqrt(sigma1_sq);
  const double hi = cutoffs.upper(y), lo = cutoffs.lower(y);
  const double cell = norm_cdf((hi - mz) / s1) - norm_cdf((lo - mz) / s1);
  const double v = cell * norm_cdf(mw / s2);
  return v < kProbFloor ? kProbFloor : v;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::vector<int> out(labels.size());
  std::unordered_map<int, int> remap;
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return out;
}

int num_clusters(const std::vector<int>& labels) {
  int k = 0;
  for (int lab : canonical_labels(labels)) k = std::max(k, lab + 1);
  return k;
}

}  // namespace co3

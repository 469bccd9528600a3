#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace co3 {

namespace {
// Generation noise matches the simulation-study model settings.
constexpr double kGenSigma1Sq = 0.1;
constexpr double kGenSigma2Sq = 1.5;
constexpr double kJitterVar = 0.1;
}  // namespace

void ScenarioConfig::validate() const {
  if (n < 1 || p < 1) throw std::invalid_argument("ScenarioConfig: n, p must be >= 1");
  if (c < 2) throw std::invalid_argument("ScenarioConfig: c must be >= 2");
  if (d < 1) throw std::invalid_argument("ScenarioConfig: d must be >= 1");
  if (row_components < 1 || col_components < 1)
    throw std::invalid_argument("ScenarioConfig: component counts must be >= 1");
  if (row_components > n || col_components > p)
    throw std::invalid_argument("ScenarioConfig: more components than items");
  if (!(censor_rate >= 0.0 && censor_rate < 1.0))
    throw std::invalid_argument("ScenarioConfig: censor_rate must lie in [0,1)");
  if (target_category < 1 || target_category > c)
    throw std::invalid_argument("ScenarioConfig: target_category outside 1..c");
  if (!(separation >= 0.0))
    throw std::invalid_argument("ScenarioConfig: separation must be >= 0");
}

Eigen::VectorXd component_mean(int m, int k, int d, double separation) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  if (k <= 1 || separation == 0.0) return mu;
  if (k <= d) {
    // Vertices of a regular simplex centered at the origin, built on the
    // first k coordinates and scaled to length `separation`.
    const double diag = 1.0 - 1.0 / k;
    const double off = -1.0 / k;
    const double norm = std::sqrt(diag);
    for (int s = 0; s < k; ++s)
      mu(s) = (s == m ? diag : off) / norm * separation;
    return mu;
  }
  // More components than dimensions: signed coordinate directions,
  // walking further out on each wrap.
  const int axis = m % d;
  const int wrap = m / d;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  mu(axis) = sign * (1.0 + wrap) * separation;
  return mu;
}

FactorDraw generate_factors(int k_components, int count, int d, double separation,
                            Rng& rng) {
  if (k_components > count)
    throw std::invalid_argument("generate_factors: more components than factors");
  FactorDraw out;
  out.labels.resize(count);
  for (int i = 0; i < count; ++i) out.labels[i] = i % k_components;
  // Fisher-Yates shuffle.
  for (int i = count - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(out.labels[i], out.labels[j]);
  }

  const double jitter_sd = std::sqrt(kJitterVar);
  out.factors.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd mu = component_mean(out.labels[i], k_components, d, separation);
    Eigen::MatrixXd f(d, 2);
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < d; ++s) f(s, r) = mu(s) + jitter_sd * rng.normal();
    out.factors.push_back(std::move(f));
  }
  return out;
}

Simulation generate_dataset(const ScenarioConfig& sc) {
  sc.validate();
  Rng rng(sc.seed);

  const FactorDraw rows = generate_factors(sc.row_components, sc.n, sc.d,
                                           sc.separation, rng);
  const FactorDraw cols = generate_factors(sc.col_components, sc.p, sc.d,
                                           sc.separation, rng);
  const Cutoffs cutoffs = make_default_cutoffs(sc.c);

  Simulation sim;
  sim.row_truth = rows.labels;
  sim.col_truth = cols.labels;
  sim.z.resize(sc.n, sc.p);
  sim.w.resize(sc.n, sc.p);

  std::vector<int> y(static_cast<std::size_t>(sc.n) * sc.p);
  std::vector<std::uint8_t> delta(y.size(), 1);

  const double s1 = std::sqrt(kGenSigma1Sq), s2 = std::sqrt(kGenSigma2Sq);
  for (int i = 0; i < sc.n; ++i) {
    for (int j = 0; j < sc.p; ++j) {
      const double mz = rows.factors[i].col(0).dot(cols.factors[j].col(0));
      const double mw = rows.factors[i].col(1).dot(cols.factors[j].col(1));
      sim.z(i, j) = mz + s1 * rng.normal();
      sim.w(i, j) = mw + s2 * rng.normal();
      y[static_cast<std::size_t>(i) * sc.p + j] = cutoffs.category_of(sim.z(i, j));
    }
  }

  const long long np = static_cast<long long>(sc.n) * sc.p;
  sim.requested_censored =
      static_cast<int>(std::ceil(sc.censor_rate * static_cast<double>(np)));

  std::vector<std::size_t> eligible;
  if (sc.censor_mode == CensorMode::random) {
    eligible.resize(y.size());
    for (std::size_t idx = 0; idx < y.size(); ++idx) eligible[idx] = idx;
  } else {
    for (std::size_t idx = 0; idx < y.size(); ++idx)
      if (y[idx] == sc.target_category) eligible.push_back(idx);
  }

  const int target = std::min<int>(sim.requested_censored,
                                   static_cast<int>(eligible.size()));
  // Partial Fisher-Yates: the first `target` positions become the sample.
  for (int t = 0; t < target; ++t) {
    const std::size_t j =
        t + static_cast<std::size_t>(rng.below(eligible.size() - t));
    std::swap(eligible[t], eligible[j]);
    delta[eligible[t]] = 0;
  }
  sim.censored = target;

  sim.data = Dataset::create(sc.n, sc.p, sc.c, std::move(y), std::move(delta));
  return sim;
}

}  // namespace co3

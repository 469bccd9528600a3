#include "inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mathutil.hpp"
#include "parallel.hpp"

namespace co3 {

SimilarityMatrix posterior_similarity(const std::vector<std::vector<int>>& draws) {
  if (draws.empty())
    throw std::invalid_argument("posterior_similarity: need at least one draw");
  const std::size_t N = draws[0].size();
  for (const auto& d : draws)
    if (d.size() != N)
      throw std::invalid_argument("posterior_similarity: draw lengths differ");

  SimilarityMatrix out;
  out.N = static_cast<int>(N);
  out.s = Eigen::MatrixXd::Zero(N, N);
  for (const auto& d : draws)
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = a; b < N; ++b)
        if (d[a] == d[b]) out.s(a, b) += 1.0;
  out.s /= static_cast<double>(draws.size());
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a + 1; b < N; ++b) out.s(b, a) = out.s(a, b);
  return out;
}

double vi_objective(const std::vector<int>& labels, const Eigen::MatrixXd& s) {
  const int N = static_cast<int>(labels.size());
  int k = 0;
  for (int lab : labels) k = std::max(k, lab + 1);
  std::vector<double> sizes(k, 0.0);
  for (int lab : labels) sizes[lab] += 1.0;

  double obj = 0.0;
  for (int a = 0; a < N; ++a) {
    double in_cluster_mass = 0.0;
    for (int b = 0; b < N; ++b)
      if (labels[b] == labels[a]) in_cluster_mass += s(a, b);
    obj += std::log2(sizes[labels[a]]) - 2.0 * std::log2(in_cluster_mass);
  }
  return obj;
}

std::vector<int> vi_point_estimate(const SimilarityMatrix& sim) {
  const int N = sim.N;
  if (N < 1) throw std::invalid_argument("vi_point_estimate: empty similarity matrix");

  // Complete-linkage agglomeration on D = 1 - s; every level is a candidate.
  std::vector<std::vector<int>> members(N);
  std::vector<int> labels(N);
  for (int i = 0; i < N; ++i) {
    members[i] = {i};
    labels[i] = i;
  }

  std::vector<std::vector<int>> candidates;
  candidates.push_back(canonical_labels(labels));

  Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(N, N) - sim.s;
  std::vector<int> alive(N);
  for (int i = 0; i < N; ++i) alive[i] = i;

  auto linkage = [&](int a, int b) {
    double m = -std::numeric_limits<double>::infinity();
    for (int x : members[a])
      for (int y : members[b]) m = std::max(m, dist(x, y));
    return m;
  };

  while (alive.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      for (std::size_t j = i + 1; j < alive.size(); ++j) {
        const double d = linkage(alive[i], alive[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    const int ka = alive[bi], kb = alive[bj];
    members[ka].insert(members[ka].end(), members[kb].begin(), members[kb].end());
    members[kb].clear();
    for (int x : members[ka]) labels[x] = ka;
    alive.erase(alive.begin() + bj);
    candidates.push_back(canonical_labels(labels));
  }

  double best_obj = std::numeric_limits<double>::infinity();
  int best_k = N + 1;
  std::size_t best_idx = 0;
  for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
    const double obj = vi_objective(candidates[idx], sim.s);
    const int k = num_clusters(candidates[idx]);
    if (obj < best_obj - 1e-12 ||
        (std::abs(obj - best_obj) <= 1e-12 && k < best_k)) {
      best_obj = obj;
      best_k = k;
      best_idx = idx;
    }
  }
  return candidates[best_idx];
}

namespace {

struct PairCounts {
  long long cells = 0;    // sum over contingency cells of C(n_uv, 2)
  long long a_pairs = 0;  // sum over a-marginals
  long long b_pairs = 0;
  long long total = 0;    // C(N, 2)
};

long long choose2(long long n) { return n * (n - 1) / 2; }

double ari_from_counts(const PairCounts& pc) {
  if (pc.total == 0) return 1.0;
  const double expected =
      static_cast<double>(pc.a_pairs) * static_cast<double>(pc.b_pairs) /
      static_cast<double>(pc.total);
  const double maxi = 0.5 * (static_cast<double>(pc.a_pairs) +
                             static_cast<double>(pc.b_pairs));
  const double denom = maxi - expected;
  if (denom == 0.0) return 1.0;  // both trivial partitions
  return (static_cast<double>(pc.cells) - expected) / denom;
}

}  // namespace

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: length mismatch");
  if (a.empty()) throw std::invalid_argument("ari: empty partitions");
  const auto ca = canonical_labels(a);
  const auto cb = canonical_labels(b);
  const int ka = num_clusters(ca), kb = num_clusters(cb);

  std::vector<long long> table(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<long long> ma(ka, 0), mb(kb, 0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    ++table[static_cast<std::size_t>(ca[i]) * kb + cb[i]];
    ++ma[ca[i]];
    ++mb[cb[i]];
  }

  PairCounts pc;
  for (long long v : table) pc.cells += choose2(v);
  for (long long v : ma) pc.a_pairs += choose2(v);
  for (long long v : mb) pc.b_pairs += choose2(v);
  pc.total = choose2(static_cast<long long>(ca.size()));
  return ari_from_counts(pc);
}

double bari(const std::vector<int>& rows_a, const std::vector<int>& cols_a,
            const std::vector<int>& rows_b, const std::vector<int>& cols_b) {
  if (rows_a.size() != rows_b.size() || cols_a.size() != cols_b.size())
    throw std::invalid_argument("bari: dimension mismatch");
  if (rows_a.empty() || cols_a.empty())
    throw std::invalid_argument("bari: empty partitions");

  const auto ra = canonical_labels(rows_a), rb = canonical_labels(rows_b);
  const auto ca = canonical_labels(cols_a), cb = canonical_labels(cols_b);
  const int kra = num_clusters(ra), krb = num_clusters(rb);
  const int kca = num_clusters(ca), kcb = num_clusters(cb);

  std::vector<long long> rtab(static_cast<std::size_t>(kra) * krb, 0);
  std::vector<long long> ctab(static_cast<std::size_t>(kca) * kcb, 0);
  std::vector<long long> ra_m(kra, 0), rb_m(krb, 0), ca_m(kca, 0), cb_m(kcb, 0);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ++rtab[static_cast<std::size_t>(ra[i]) * krb + rb[i]];
    ++ra_m[ra[i]];
    ++rb_m[rb[i]];
  }
  for (std::size_t j = 0; j < ca.size(); ++j) {
    ++ctab[static_cast<std::size_t>(ca[j]) * kcb + cb[j]];
    ++ca_m[ca[j]];
    ++cb_m[cb[j]];
  }

  // Bivariate contingency cells are products of row and column cells.
  PairCounts pc;
  for (long long r : rtab)
    for (long long c : ctab) pc.cells += choose2(r * c);
  for (long long r : ra_m)
    for (long long c : ca_m) pc.a_pairs += choose2(r * c);
  for (long long r : rb_m)
    for (long long c : cb_m) pc.b_pairs += choose2(r * c);
  pc.total = choose2(static_cast<long long>(ra.size()) *
                     static_cast<long long>(ca.size()));
  return ari_from_counts(pc);
}

double lpml(const std::vector<Eigen::MatrixXd>& draws) {
  if (draws.empty()) throw std::invalid_argument("lpml: need at least one draw");
  const auto rows = draws[0].rows(), cols = draws[0].cols();
  for (const auto& L : draws) {
    if (L.rows() != rows || L.cols() != cols)
      throw std::invalid_argument("lpml: draw dimensions differ");
    if (!(L.array() > 0.0).all())
      throw std::invalid_argument("lpml: likelihoods must be positive");
  }
  const double log_T = std::log(static_cast<double>(draws.size()));
  double total = 0.0;
  std::vector<double> neg_logs(draws.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (std::size_t t = 0; t < draws.size(); ++t)
        neg_logs[t] = -std::log(std::max(draws[t](i, j), kProbFloor));
      total += log_T - log_sum_exp(neg_logs);
    }
  }
  return total;
}

double lpml(const ChainOutput& chain) {
  if (chain.stored < 1) throw std::invalid_argument("lpml: chain stored no draws");
  const double log_T = std::log(static_cast<double>(chain.stored));
  double total = 0.0;
  for (Eigen::Index i = 0; i < chain.neg_log_like_lse.rows(); ++i)
    for (Eigen::Index j = 0; j < chain.neg_log_like_lse.cols(); ++j)
      total += log_T - chain.neg_log_like_lse(i, j);
  return total;
}

LpmlReport select_d(const Dataset& data, const Cutoffs& cutoffs,
                    const ModelConfig& config_template, const std::vector<int>& d_grid,
                    const GibbsControls& controls) {
  if (d_grid.empty()) throw std::invalid_argument("select_d: empty grid");

  LpmlReport report;
  report.d = d_grid;
  report.value.assign(d_grid.size(), 0.0);
  report.ok.assign(d_grid.size(), false);

  const int workers = resolve_threads(controls.threads);
  parallel_for(static_cast<int>(d_grid.size()), workers, [&](int idx) {
    const int d = d_grid[idx];
    ModelConfig cfg = ModelConfig::defaults(d);
    cfg.alpha1 = config_template.alpha1;
    cfg.alpha2 = config_template.alpha2;
    cfg.sigma_fixed = config_template.sigma_fixed;
    cfg.sigma1_sq = config_template.sigma1_sq;
    cfg.sigma2_sq = config_template.sigma2_sq;
    cfg.sigma_prior = config_template.sigma_prior;

    GibbsControls ctl = controls;
    ctl.seed = hash_combine(controls.seed, static_cast<std::uint64_t>(d));
    ctl.threads = 1;  // parallelism is across the grid here
    ctl.low_memory = true;

    try {
      const ChainOutput chain = run_chain(data, cutoffs, cfg, ctl);
      if (!chain.valid) return;
      report.value[idx] = lpml(chain);
      report.ok[idx] = true;
    } catch (const std::exception&) {
      // flagged as failed; the rest of the grid continues
    }
  });

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < d_grid.size(); ++idx) {
    if (report.ok[idx] && report.value[idx] > best) {
      best = report.value[idx];
      report.best_d = d_grid[idx];
    }
  }
  return report;
}

}  // namespace co3

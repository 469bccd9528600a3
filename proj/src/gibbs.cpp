#include "gibbs.hpp"

#include <cmath>
#include <limits>

#include "mathutil.hpp"
#include "parallel.hpp"
#include "truncnorm.hpp"

namespace co3 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream tags keeping the z and w entry streams disjoint.
constexpr std::uint64_t kStreamZ = 0x7a;
constexpr std::uint64_t kStreamW = 0x77;

std::uint64_t entry_key(const SweepContext& ctx, std::uint64_t tag, int i, int j) {
  std::uint64_t k = hash_combine(ctx.seed, ctx.iteration);
  k = hash_combine(k, tag);
  k = hash_combine(k, static_cast<std::uint64_t>(i));
  return hash_combine(k, static_cast<std::uint64_t>(j));
}

double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& mat, const char* where) {
  if (!mat.allFinite())
    throw numerical_error(std::string("non-finite precision matrix in ") + where);
  Eigen::LLT<Eigen::MatrixXd> llt(mat);
  if (llt.info() != Eigen::Success)
    throw numerical_error(std::string("non-positive-definite precision in ") + where);
  return llt;
}

// Builds the axis cache from the *other* axis's expanded factors.
AxisCache make_cache(const Eigen::MatrixXd& other1, const Eigen::MatrixXd& other2,
                     const Eigen::MatrixXd& M, double u_1, double u_2,
                     const Eigen::MatrixXd& V, double alpha, int count,
                     double sigma1_sq, double sigma2_sq, const char* where) {
  AxisCache c;
  c.other1 = other1;
  c.other2 = other2;
  c.AAt1 = other1 * other1.transpose();
  c.AAt2 = other2 * other2.transpose();
  const auto vllt = checked_llt(V, where);
  const int d = static_cast<int>(V.rows());
  c.Vinv = vllt.solve(Eigen::MatrixXd::Identity(d, d));
  const double logdet_V = logdet_from_llt(vllt);
  c.logdet_S0_1 = d * std::log(u_1) + logdet_V;
  c.logdet_S0_2 = d * std::log(u_2) + logdet_V;
  c.m_1 = M.col(0);
  c.m_2 = M.col(1);
  c.S0inv_m1 = (c.Vinv / u_1) * c.m_1;
  c.S0inv_m2 = (c.Vinv / u_2) * c.m_2;
  c.prior_quad1 = c.m_1.dot(c.S0inv_m1);
  c.prior_quad2 = c.m_2.dot(c.S0inv_m2);
  c.chol1 = checked_llt(c.AAt1 / sigma1_sq + c.Vinv / u_1, where);
  c.chol2 = checked_llt(c.AAt2 / sigma2_sq + c.Vinv / u_2, where);
  c.logdet_P1 = logdet_from_llt(c.chol1);
  c.logdet_P2 = logdet_from_llt(c.chol2);
  c.u_1 = u_1;
  c.u_2 = u_2;
  c.alpha = alpha;
  c.count = count;
  c.m = static_cast<int>(other1.cols());
  c.sigma1_sq = sigma1_sq;
  c.sigma2_sq = sigma2_sq;
  return c;
}

// log of the predictive marginal of one (zvec, wvec) pair with the item's
// factor integrated out under the base measure; both columns factorize
// under diagonal U.
double log_base_marginal(const AxisCache& c, const Eigen::VectorXd& zvec,
                         const Eigen::VectorXd& wvec) {
  auto one_column = [&](const Eigen::MatrixXd& A,
                        const Eigen::LLT<Eigen::MatrixXd>& chol, double logdet_P,
                        double logdet_S0, const Eigen::VectorXd& S0inv_m,
                        double prior_quad, double sigma_sq,
                        const Eigen::VectorXd& vec) {
    const Eigen::VectorXd b = A * vec / sigma_sq + S0inv_m;
    const double quad = b.dot(chol.solve(b));
    return -0.5 * c.m * std::log(2.0 * M_PI * sigma_sq) - 0.5 * logdet_S0 -
           0.5 * logdet_P - 0.5 * (vec.squaredNorm() / sigma_sq + prior_quad) +
           0.5 * quad;
  };
  return one_column(c.other1, c.chol1, c.logdet_P1, c.logdet_S0_1, c.S0inv_m1,
                    c.prior_quad1, c.sigma1_sq, zvec) +
         one_column(c.other2, c.chol2, c.logdet_P2, c.logdet_S0_2, c.S0inv_m2,
                    c.prior_quad2, c.sigma2_sq, wvec);
}

double log_item_likelihood(const AxisCache& c, const Eigen::MatrixXd& theta,
                           const Eigen::VectorXd& zvec, const Eigen::VectorXd& wvec) {
  const Eigen::VectorXd mu1 = c.other1.transpose() * theta.col(0);
  const Eigen::VectorXd mu2 = c.other2.transpose() * theta.col(1);
  return -0.5 * c.m * std::log(2.0 * M_PI * c.sigma1_sq) -
         0.5 * (zvec - mu1).squaredNorm() / c.sigma1_sq -
         0.5 * c.m * std::log(2.0 * M_PI * c.sigma2_sq) -
         0.5 * (wvec - mu2).squaredNorm() / c.sigma2_sq;
}

UrnWeights urn_weights_from_cache(const AxisCache& c,
                                  const std::vector<Eigen::MatrixXd>& distinct,
                                  const std::vector<int>& counts,
                                  const Eigen::VectorXd& zvec,
                                  const Eigen::VectorXd& wvec) {
  UrnWeights w;
  w.log_w0 = std::log(c.alpha) + log_base_marginal(c, zvec, wvec);
  w.log_w.reserve(distinct.size());
  for (std::size_t l = 0; l < distinct.size(); ++l)
    w.log_w.push_back(std::log(static_cast<double>(counts[l])) +
                      log_item_likelihood(c, distinct[l], zvec, wvec));
  return w;
}

// Returns -1 for the new-cluster option, otherwise an existing index.
int sample_urn(const UrnWeights& w, Rng& rng) {
  std::vector<double> all;
  all.reserve(w.log_w.size() + 1);
  all.push_back(w.log_w0);
  all.insert(all.end(), w.log_w.begin(), w.log_w.end());
  const double lse = log_sum_exp(all);
  if (!std::isfinite(lse)) throw numerical_error("urn weights degenerate");
  double u = rng.uniform();
  for (std::size_t idx = 0; idx < all.size(); ++idx) {
    u -= std::exp(all[idx] - lse);
    if (u <= 0.0) return static_cast<int>(idx) - 1;
  }
  return static_cast<int>(all.size()) - 2;
}

Eigen::MatrixXd sample_base_from_cache(const AxisCache& c, const Eigen::VectorXd& zvec,
                                       const Eigen::VectorXd& wvec, Rng& rng) {
  const int d = static_cast<int>(c.Vinv.rows());
  Eigen::MatrixXd draw(d, 2);
  {
    const Eigen::VectorXd b = c.other1 * zvec / c.sigma1_sq + c.S0inv_m1;
    Eigen::VectorXd xi(d);
    for (int s = 0; s < d; ++s) xi(s) = rng.normal();
    draw.col(0) = c.chol1.solve(b) + c.chol1.matrixU().solve(xi);
  }
  {
    const Eigen::VectorXd b = c.other2 * wvec / c.sigma2_sq + c.S0inv_m2;
    Eigen::VectorXd xi(d);
    for (int s = 0; s < d; ++s) xi(s) = rng.normal();
    draw.col(1) = c.chol2.solve(b) + c.chol2.matrixU().solve(xi);
  }
  return draw;
}

void detach(std::vector<int>& labels, std::vector<int>& counts,
            std::vector<Eigen::MatrixXd>& distinct, int item) {
  const int l = labels[item];
  labels[item] = -1;
  if (--counts[l] > 0) return;
  const int last = static_cast<int>(distinct.size()) - 1;
  if (l != last) {
    distinct[l] = std::move(distinct[last]);
    counts[l] = counts[last];
    for (int& lab : labels)
      if (lab == last) lab = l;
  }
  distinct.pop_back();
  counts.pop_back();
}

}  // namespace

void GibbsControls::validate() const {
  if (iterations < 1) throw std::invalid_argument("GibbsControls: iterations must be >= 1");
  if (effective_burn_in() < 0 || effective_burn_in() >= iterations)
    throw std::invalid_argument("GibbsControls: burn_in must be < iterations");
  if (thin < 1) throw std::invalid_argument("GibbsControls: thin must be >= 1");
}

Eigen::MatrixXd expand_factors(const std::vector<Eigen::MatrixXd>& distinct,
                               const std::vector<int>& labels, int r) {
  const int d = distinct.empty() ? 0 : static_cast<int>(distinct[0].rows());
  Eigen::MatrixXd out(d, labels.size());
  for (std::size_t idx = 0; idx < labels.size(); ++idx)
    out.col(idx) = distinct[labels[idx]].col(r);
  return out;
}

Eigen::MatrixXd factor_means(const LatentState& state, int r) {
  const Eigen::MatrixXd rows = expand_factors(state.theta1, state.row_labels, r);
  const Eigen::MatrixXd cols = expand_factors(state.theta2, state.col_labels, r);
  return rows.transpose() * cols;
}

AxisCache make_row_cache(const LatentState& state, const ModelConfig& config) {
  return make_cache(expand_factors(state.theta2, state.col_labels, 0),
                    expand_factors(state.theta2, state.col_labels, 1), config.M1,
                    config.u1_11, config.u1_22, config.V1, config.alpha1,
                    static_cast<int>(state.row_labels.size()), state.sigma1_sq,
                    state.sigma2_sq, "row urn");
}

AxisCache make_col_cache(const LatentState& state, const ModelConfig& config) {
  return make_cache(expand_factors(state.theta1, state.row_labels, 0),
                    expand_factors(state.theta1, state.row_labels, 1), config.M2,
                    config.u2_11, config.u2_22, config.V2, config.alpha2,
                    static_cast<int>(state.col_labels.size()), state.sigma1_sq,
                    state.sigma2_sq, "column urn");
}

Eigen::MatrixXd sample_prior_value(const Eigen::MatrixXd& M, double u_1, double u_2,
                                   const Eigen::MatrixXd& V, Rng& rng) {
  const int d = static_cast<int>(V.rows());
  const Eigen::MatrixXd L = checked_llt(V, "base measure").matrixL();
  Eigen::MatrixXd out(d, 2);
  const double su[2] = {std::sqrt(u_1), std::sqrt(u_2)};
  for (int r = 0; r < 2; ++r) {
    Eigen::VectorXd xi(d);
    for (int s = 0; s < d; ++s) xi(s) = rng.normal();
    out.col(r) = M.col(r) + su[r] * (L * xi);
  }
  return out;
}

Eigen::VectorXd sample_column_posterior(const Eigen::MatrixXd& A,
                                        const Eigen::VectorXd& y, double sigma_sq,
                                        const Eigen::MatrixXd& Vinv_over_u,
                                        const Eigen::VectorXd& prior_mean, Rng& rng) {
  const int d = static_cast<int>(Vinv_over_u.rows());
  const Eigen::MatrixXd P = A * A.transpose() / sigma_sq + Vinv_over_u;
  const auto chol = checked_llt(P, "column posterior");
  const Eigen::VectorXd b = A * y / sigma_sq + Vinv_over_u * prior_mean;
  Eigen::VectorXd xi(d);
  for (int s = 0; s < d; ++s) xi(s) = rng.normal();
  return chol.solve(b) + chol.matrixU().solve(xi);
}

LatentState init_state(const Dataset& data, const Cutoffs& cutoffs,
                       const ModelConfig& config, Rng& rng) {
  // Every item starts in its own cluster with a base-measure draw. The
  // sampler then merges downward; starting from a single shared cluster
  // can wedge binary-data chains in a merged mode it cannot split.
  LatentState st;
  st.sigma1_sq = config.sigma1_sq;
  st.sigma2_sq = config.sigma2_sq;
  for (int i = 0; i < data.n; ++i) {
    st.theta1.push_back(sample_prior_value(config.M1, config.u1_11, config.u1_22,
                                           config.V1, rng));
    st.row_labels.push_back(i);
  }
  for (int j = 0; j < data.p; ++j) {
    st.theta2.push_back(sample_prior_value(config.M2, config.u2_11, config.u2_22,
                                           config.V2, rng));
    st.col_labels.push_back(j);
  }
  st.row_counts.assign(data.n, 1);
  st.col_counts.assign(data.p, 1);

  st.z.resize(data.n, data.p);
  st.w.resize(data.n, data.p);
  const int c = cutoffs.categories();
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.p; ++j) {
      if (data.observed(i, j)) {
        const int y = data.code(i, j);
        double zval;
        if (y == 1)
          zval = cutoffs.gamma[1] - 1.0;
        else if (y == c)
          zval = cutoffs.gamma[c - 1] + 1.0;
        else
          zval = 0.5 * (cutoffs.lower(y) + cutoffs.upper(y));
        st.z(i, j) = zval;
        st.w(i, j) = 1.0;
      } else {
        st.z(i, j) = 0.0;
        st.w(i, j) = -1.0;
      }
    }
  }
  return st;
}

void update_z(LatentState& state, const Dataset& data, const Cutoffs& cutoffs,
              const SweepContext& ctx) {
  const Eigen::MatrixXd mean = factor_means(state, 0);
  const double var = state.sigma1_sq;
  const double sd = std::sqrt(var);
  parallel_for(data.n, ctx.threads, [&](int i) {
    for (int j = 0; j < data.p; ++j) {
      Rng g(entry_key(ctx, kStreamZ, i, j));
      if (data.observed(i, j)) {
        const int y = data.code(i, j);
        state.z(i, j) =
            sample_truncnorm(mean(i, j), var, cutoffs.lower(y), cutoffs.upper(y), g);
      } else {
        state.z(i, j) = mean(i, j) + sd * g.normal();
      }
    }
  });
}

void update_w(LatentState& state, const Dataset& data, const SweepContext& ctx) {
  const Eigen::MatrixXd mean = factor_means(state, 1);
  const double var = state.sigma2_sq;
  parallel_for(data.n, ctx.threads, [&](int i) {
    for (int j = 0; j < data.p; ++j) {
      Rng g(entry_key(ctx, kStreamW, i, j));
      if (data.observed(i, j))
        state.w(i, j) = sample_truncnorm(mean(i, j), var, 0.0, kInf, g);
      else
        state.w(i, j) = sample_truncnorm(mean(i, j), var, -kInf, 0.0, g);
    }
  });
}

UrnWeights urn_weights_row_cached(int i, const LatentState& state, const AxisCache& cache) {
  return urn_weights_from_cache(cache, state.theta1, state.row_counts,
                                state.z.row(i), state.w.row(i));
}

UrnWeights urn_weights_col_cached(int j, const LatentState& state, const AxisCache& cache) {
  return urn_weights_from_cache(cache, state.theta2, state.col_counts,
                                state.z.col(j), state.w.col(j));
}

UrnWeights urn_weights_row(int i, const LatentState& state, const Dataset&,
                           const ModelConfig& config) {
  return urn_weights_row_cached(i, state, make_row_cache(state, config));
}

UrnWeights urn_weights_col(int j, const LatentState& state, const Dataset&,
                           const ModelConfig& config) {
  return urn_weights_col_cached(j, state, make_col_cache(state, config));
}

Eigen::MatrixXd sample_base_row(int i, const LatentState& state, const Dataset&,
                                const ModelConfig& config, Rng& rng) {
  const AxisCache cache = make_row_cache(state, config);
  return sample_base_from_cache(cache, state.z.row(i), state.w.row(i), rng);
}

Eigen::MatrixXd sample_base_col(int j, const LatentState& state, const Dataset&,
                                const ModelConfig& config, Rng& rng) {
  const AxisCache cache = make_col_cache(state, config);
  return sample_base_from_cache(cache, state.z.col(j), state.w.col(j), rng);
}

void detach_row(LatentState& state, int i) {
  detach(state.row_labels, state.row_counts, state.theta1, i);
}

void detach_col(LatentState& state, int j) {
  detach(state.col_labels, state.col_counts, state.theta2, j);
}

void update_row_assignments(LatentState& state, const Dataset& data,
                            const ModelConfig& config, Rng& rng) {
  const AxisCache cache = make_row_cache(state, config);
  for (int i = 0; i < data.n; ++i) {
    detach_row(state, i);
    const UrnWeights w = urn_weights_row_cached(i, state, cache);
    const int pick = sample_urn(w, rng);
    if (pick < 0) {
      state.theta1.push_back(
          sample_base_from_cache(cache, state.z.row(i), state.w.row(i), rng));
      state.row_counts.push_back(1);
      state.row_labels[i] = state.kn() - 1;
    } else {
      ++state.row_counts[pick];
      state.row_labels[i] = pick;
    }
  }
}

void update_col_assignments(LatentState& state, const Dataset& data,
                            const ModelConfig& config, Rng& rng) {
  const AxisCache cache = make_col_cache(state, config);
  for (int j = 0; j < data.p; ++j) {
    detach_col(state, j);
    const UrnWeights w = urn_weights_col_cached(j, state, cache);
    const int pick = sample_urn(w, rng);
    if (pick < 0) {
      state.theta2.push_back(
          sample_base_from_cache(cache, state.z.col(j), state.w.col(j), rng));
      state.col_counts.push_back(1);
      state.col_labels[j] = state.kp() - 1;
    } else {
      ++state.col_counts[pick];
      state.col_labels[j] = pick;
    }
  }
}

namespace {

void reshuffle_axis(std::vector<Eigen::MatrixXd>& distinct, const std::vector<int>& counts,
                    const std::vector<int>& labels, const Eigen::MatrixXd& zdata,
                    const Eigen::MatrixXd& wdata, bool items_are_rows,
                    const AxisCache& cache, Rng& rng) {
  const int k = static_cast<int>(distinct.size());
  const int d = static_cast<int>(cache.Vinv.rows());
  const int m = cache.m;

  Eigen::MatrixXd zsum = Eigen::MatrixXd::Zero(m, k);
  Eigen::MatrixXd wsum = Eigen::MatrixXd::Zero(m, k);
  for (std::size_t item = 0; item < labels.size(); ++item) {
    const int l = labels[item];
    if (items_are_rows) {
      zsum.col(l) += zdata.row(item).transpose();
      wsum.col(l) += wdata.row(item).transpose();
    } else {
      zsum.col(l) += zdata.col(item);
      wsum.col(l) += wdata.col(item);
    }
  }

  for (int l = 0; l < k; ++l) {
    const double nl = static_cast<double>(counts[l]);
    auto draw_column = [&](const Eigen::MatrixXd& AAt, const Eigen::MatrixXd& A,
                           const Eigen::VectorXd& S0inv_m, double u, double sigma_sq,
                           const Eigen::VectorXd& sum_vec) {
      const Eigen::MatrixXd P = cache.Vinv / u + (nl / sigma_sq) * AAt;
      const auto chol = checked_llt(P, "reshuffle");
      const Eigen::VectorXd b = S0inv_m + A * sum_vec / sigma_sq;
      Eigen::VectorXd xi(d);
      for (int s = 0; s < d; ++s) xi(s) = rng.normal();
      return (chol.solve(b) + chol.matrixU().solve(xi)).eval();
    };
    distinct[l].col(0) = draw_column(cache.AAt1, cache.other1, cache.S0inv_m1,
                                     cache.u_1, cache.sigma1_sq, zsum.col(l));
    distinct[l].col(1) = draw_column(cache.AAt2, cache.other2, cache.S0inv_m2,
                                     cache.u_2, cache.sigma2_sq, wsum.col(l));
  }
}

}  // namespace

void reshuffle_rows(LatentState& state, const ModelConfig& config, Rng& rng) {
  const AxisCache cache = make_row_cache(state, config);
  reshuffle_axis(state.theta1, state.row_counts, state.row_labels, state.z, state.w,
                 /*items_are_rows=*/true, cache, rng);
}

void reshuffle_cols(LatentState& state, const ModelConfig& config, Rng& rng) {
  const AxisCache cache = make_col_cache(state, config);
  reshuffle_axis(state.theta2, state.col_counts, state.col_labels, state.z, state.w,
                 /*items_are_rows=*/false, cache, rng);
}

void update_sigmas(LatentState& state, const ModelConfig& config, Rng& rng) {
  if (config.sigma_fixed) return;
  const double np = static_cast<double>(state.z.rows()) * state.z.cols();
  const double rss_z = (state.z - factor_means(state, 0)).squaredNorm();
  const double rss_w = (state.w - factor_means(state, 1)).squaredNorm();
  state.sigma1_sq = rng.inverse_gamma(config.sigma_prior.shape1 + 0.5 * np,
                                      config.sigma_prior.rate1 + 0.5 * rss_z);
  state.sigma2_sq = rng.inverse_gamma(config.sigma_prior.shape2 + 0.5 * np,
                                      config.sigma_prior.rate2 + 0.5 * rss_w);
}

void gibbs_sweep(LatentState& state, const Dataset& data, const Cutoffs& cutoffs,
                 const ModelConfig& config, Rng& rng, const SweepContext& ctx) {
  update_row_assignments(state, data, config, rng);
  update_col_assignments(state, data, config, rng);
  reshuffle_rows(state, config, rng);
  reshuffle_cols(state, config, rng);
  update_z(state, data, cutoffs, ctx);
  update_w(state, data, ctx);
  update_sigmas(state, config, rng);
}

ChainOutput run_chain(const Dataset& data, const Cutoffs& cutoffs,
                      const ModelConfig& config, const GibbsControls& controls) {
  controls.validate();
  config.validate();

  ChainOutput out;
  out.n = data.n;
  out.p = data.p;
  out.neg_log_like_lse =
      Eigen::MatrixXd::Constant(data.n, data.p, -kInf);

  Rng rng(controls.seed);
  LatentState st = init_state(data, cutoffs, config, rng);

  const int burn = controls.effective_burn_in();
  const int latent_threads =
      controls.parallel_latent ? resolve_threads(controls.threads) : 1;

  for (int iter = 0; iter < controls.iterations; ++iter) {
    try {
      gibbs_sweep(st, data, cutoffs, config, rng,
                  {controls.seed, static_cast<std::uint64_t>(iter), latent_threads});
    } catch (const numerical_error& e) {
      out.valid = false;
      out.failed_iteration = iter;
      out.failure = "iteration " + std::to_string(iter) + ": " + e.what();
      return out;
    }

    if (iter < burn || (iter - burn) % controls.thin != 0) continue;

    out.row_draws.push_back(canonical_labels(st.row_labels));
    out.col_draws.push_back(canonical_labels(st.col_labels));
    out.sigma1_draws.push_back(st.sigma1_sq);
    out.sigma2_draws.push_back(st.sigma2_sq);
    out.kn_draws.push_back(st.kn());
    out.kp_draws.push_back(st.kp());

    const Eigen::MatrixXd mz = factor_means(st, 0);
    const Eigen::MatrixXd mw = factor_means(st, 1);
    Eigen::MatrixXd like(data.n, data.p);
    for (int i = 0; i < data.n; ++i)
      for (int j = 0; j < data.p; ++j)
        like(i, j) = entry_likelihood(data.code(i, j), data.observed(i, j), mz(i, j),
                                      mw(i, j), st.sigma1_sq, st.sigma2_sq, cutoffs);
    for (int i = 0; i < data.n; ++i)
      for (int j = 0; j < data.p; ++j)
        out.neg_log_like_lse(i, j) =
            log_add_exp(out.neg_log_like_lse(i, j), -std::log(like(i, j)));
    if (!controls.low_memory) out.like_draws.push_back(std::move(like));
    ++out.stored;
  }
  return out;
}

}  // namespace co3

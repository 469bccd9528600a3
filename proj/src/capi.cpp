#include "co3/co3.h"

#include <cstring>
#include <string>
#include <vector>

#include "csv.hpp"
#include "dp_prior.hpp"
#include "gibbs.hpp"
#include "inference.hpp"
#include "model.hpp"
#include "simulate.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
co3_status guard(Fn&& fn) {
  try {
    return fn();
  } catch (const co3::parse_error& e) {
    set_error(e.what());
    return CO3_ERR_PARSE;
  } catch (const co3::io_error& e) {
    set_error(e.what());
    return CO3_ERR_IO;
  } catch (const co3::numerical_error& e) {
    set_error(e.what());
    return CO3_ERR_NUMERICAL;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return CO3_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return CO3_ERR_INVALID_ARGUMENT;
  }
}

}  // namespace

struct co3_options {
  co3::Options opt;
};

struct co3_dataset {
  co3::Dataset data;
};

struct co3_simulation {
  co3_dataset dataset;
  std::vector<int> row_truth, col_truth;
  int censored = 0;
  int requested = 0;
};

struct co3_fit {
  int n = 0, p = 0;
  std::vector<int> row_partition, col_partition;
  std::vector<double> row_similarity, col_similarity;  // row-major
  std::vector<std::vector<int>> row_draws, col_draws;
  std::vector<double> sigma1, sigma2;
  std::vector<int> kn, kp;
  double lpml = 0.0;
};

struct co3_lpml_grid {
  co3::LpmlReport report;
};

struct co3_prior_pmf {
  std::vector<long long> k;
  std::vector<double> prob;
};

extern "C" {

const char* co3_version(void) { return "0.1.0"; }

const char* co3_last_error(void) { return g_last_error.c_str(); }

co3_options* co3_options_new(void) { return new co3_options(); }

void co3_options_free(co3_options* opt) { delete opt; }

co3_status co3_options_load_file(co3_options* opt, const char* path) {
  if (!opt || !path) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    opt->opt.load_file(path);
    return CO3_OK;
  });
}

co3_status co3_options_set(co3_options* opt, const char* key, const char* value) {
  if (!opt || !key || !value) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    opt->opt.set(key, value);
    return CO3_OK;
  });
}

char* co3_options_dump(const co3_options* opt) {
  if (!opt) return nullptr;
  const std::string s = opt->opt.dump();
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void co3_string_free(char* s) { delete[] s; }

co3_status co3_dataset_create(int n, int p, int c, const int* y,
                              const unsigned char* delta, co3_dataset** out) {
  if (!y || !delta || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const std::size_t np = static_cast<std::size_t>(n) * p;
    auto ds = co3::Dataset::create(n, p, c, std::vector<int>(y, y + np),
                                   std::vector<std::uint8_t>(delta, delta + np));
    *out = new co3_dataset{std::move(ds)};
    return CO3_OK;
  });
}

co3_status co3_dataset_load_csv(const char* path, const co3_options* opt,
                                co3_dataset** out) {
  if (!path || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const co3::CsvOptions csv =
        opt ? opt->opt.csv_options() : co3::CsvOptions{};
    *out = new co3_dataset{co3::load_dataset_csv(path, csv)};
    return CO3_OK;
  });
}

co3_status co3_dataset_save_csv(const co3_dataset* data, const char* path) {
  if (!data || !path) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    co3::save_dataset_csv(data->data, path);
    return CO3_OK;
  });
}

int co3_dataset_n(const co3_dataset* data) { return data->data.n; }
int co3_dataset_p(const co3_dataset* data) { return data->data.p; }
int co3_dataset_c(const co3_dataset* data) { return data->data.c; }

int co3_dataset_y(const co3_dataset* data, int i, int j) {
  return data->data.code(i, j);
}

int co3_dataset_observed(const co3_dataset* data, int i, int j) {
  return data->data.observed(i, j) ? 1 : 0;
}

void co3_dataset_free(co3_dataset* data) { delete data; }

co3_status co3_simulate(const co3_options* opt, co3_simulation** out) {
  if (!opt || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    co3::Simulation sim = co3::generate_dataset(opt->opt.scenario_config());
    auto* handle = new co3_simulation();
    handle->dataset.data = std::move(sim.data);
    handle->row_truth = std::move(sim.row_truth);
    handle->col_truth = std::move(sim.col_truth);
    handle->censored = sim.censored;
    handle->requested = sim.requested_censored;
    *out = handle;
    return CO3_OK;
  });
}

const co3_dataset* co3_simulation_dataset(const co3_simulation* sim) {
  return &sim->dataset;
}
const int* co3_simulation_row_truth(const co3_simulation* sim) {
  return sim->row_truth.data();
}
const int* co3_simulation_col_truth(const co3_simulation* sim) {
  return sim->col_truth.data();
}
int co3_simulation_censored(const co3_simulation* sim) { return sim->censored; }
int co3_simulation_requested_censored(const co3_simulation* sim) {
  return sim->requested;
}
void co3_simulation_free(co3_simulation* sim) { delete sim; }

co3_status co3_fit_run(const co3_dataset* data, const co3_options* opt, co3_fit** out) {
  if (!data || !opt || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&]() -> co3_status {
    const co3::ModelConfig cfg = opt->opt.model_config();
    co3::GibbsControls ctl = opt->opt.gibbs_controls();
    const co3::Cutoffs cutoffs = opt->opt.cutoffs_for(data->data.c);
    // the handle never exposes per-draw likelihood matrices; the
    // streaming accumulator computes the same LPML
    ctl.low_memory = true;

    co3::ChainOutput chain = co3::run_chain(data->data, cutoffs, cfg, ctl);
    if (!chain.valid) {
      set_error(chain.failure);
      return CO3_ERR_NUMERICAL;
    }
    if (chain.stored < 1) {
      set_error("chain stored no draws");
      return CO3_ERR_INVALID_ARGUMENT;
    }

    auto* fit = new co3_fit();
    fit->n = chain.n;
    fit->p = chain.p;
    const co3::SimilarityMatrix rows = co3::posterior_similarity(chain.row_draws);
    const co3::SimilarityMatrix cols = co3::posterior_similarity(chain.col_draws);
    fit->row_partition = co3::vi_point_estimate(rows);
    fit->col_partition = co3::vi_point_estimate(cols);
    fit->row_similarity.assign(rows.s.data(), rows.s.data() + rows.s.size());
    // Eigen stores column-major; emit row-major (symmetric, so identical).
    fit->col_similarity.assign(cols.s.data(), cols.s.data() + cols.s.size());
    fit->row_draws = std::move(chain.row_draws);
    fit->col_draws = std::move(chain.col_draws);
    fit->sigma1 = std::move(chain.sigma1_draws);
    fit->sigma2 = std::move(chain.sigma2_draws);
    fit->kn = std::move(chain.kn_draws);
    fit->kp = std::move(chain.kp_draws);
    fit->lpml = co3::lpml(chain);
    *out = fit;
    return CO3_OK;
  });
}

int co3_fit_n(const co3_fit* fit) { return fit->n; }
int co3_fit_p(const co3_fit* fit) { return fit->p; }
const int* co3_fit_row_partition(const co3_fit* fit) {
  return fit->row_partition.data();
}
const int* co3_fit_col_partition(const co3_fit* fit) {
  return fit->col_partition.data();
}
const double* co3_fit_row_similarity(const co3_fit* fit) {
  return fit->row_similarity.data();
}
const double* co3_fit_col_similarity(const co3_fit* fit) {
  return fit->col_similarity.data();
}
int co3_fit_num_draws(const co3_fit* fit) {
  return static_cast<int>(fit->row_draws.size());
}
const int* co3_fit_row_draw(const co3_fit* fit, int t) {
  return fit->row_draws[t].data();
}
const int* co3_fit_col_draw(const co3_fit* fit, int t) {
  return fit->col_draws[t].data();
}
const double* co3_fit_sigma1_trace(const co3_fit* fit) { return fit->sigma1.data(); }
const double* co3_fit_sigma2_trace(const co3_fit* fit) { return fit->sigma2.data(); }
const int* co3_fit_kn_trace(const co3_fit* fit) { return fit->kn.data(); }
const int* co3_fit_kp_trace(const co3_fit* fit) { return fit->kp.data(); }
double co3_fit_lpml(const co3_fit* fit) { return fit->lpml; }
void co3_fit_free(co3_fit* fit) { delete fit; }

co3_status co3_select_d(const co3_dataset* data, const co3_options* opt, int d_min,
                        int d_max, co3_lpml_grid** out) {
  if (!data || !opt || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  if (d_min < 1 || d_max < d_min) {
    set_error("need 1 <= d_min <= d_max");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const co3::ModelConfig cfg = opt->opt.model_config();
    const co3::GibbsControls ctl = opt->opt.gibbs_controls();
    const co3::Cutoffs cutoffs = opt->opt.cutoffs_for(data->data.c);
    std::vector<int> grid;
    for (int d = d_min; d <= d_max; ++d) grid.push_back(d);
    auto* handle = new co3_lpml_grid();
    handle->report = co3::select_d(data->data, cutoffs, cfg, grid, ctl);
    *out = handle;
    return CO3_OK;
  });
}

int co3_lpml_grid_size(const co3_lpml_grid* grid) {
  return static_cast<int>(grid->report.d.size());
}
int co3_lpml_grid_d(const co3_lpml_grid* grid, int idx) { return grid->report.d[idx]; }
double co3_lpml_grid_value(const co3_lpml_grid* grid, int idx) {
  return grid->report.value[idx];
}
int co3_lpml_grid_ok(const co3_lpml_grid* grid, int idx) {
  return grid->report.ok[idx] ? 1 : 0;
}
int co3_lpml_grid_best_d(const co3_lpml_grid* grid) { return grid->report.best_d; }
void co3_lpml_grid_free(co3_lpml_grid* grid) { delete grid; }

co3_status co3_prior_k_pmf(int n, int p, double alpha1, double alpha2,
                           co3_prior_pmf** out) {
  if (!out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    const co3::BivariateClusterPrior prior = co3::prior_k_pmf(n, p, alpha1, alpha2);
    auto* handle = new co3_prior_pmf();
    for (const auto& [k, prob] : prior.pmf) {
      handle->k.push_back(k);
      handle->prob.push_back(prob);
    }
    *out = handle;
    return CO3_OK;
  });
}

int co3_prior_pmf_size(const co3_prior_pmf* pmf) {
  return static_cast<int>(pmf->k.size());
}
long long co3_prior_pmf_k(const co3_prior_pmf* pmf, int idx) { return pmf->k[idx]; }
double co3_prior_pmf_prob(const co3_prior_pmf* pmf, int idx) {
  return pmf->prob[idx];
}
void co3_prior_pmf_free(co3_prior_pmf* pmf) { delete pmf; }

co3_status co3_expected_k(int n, int p, double alpha1, double alpha2, double* out) {
  if (!out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    *out = co3::expected_k(n, p, alpha1, alpha2);
    return CO3_OK;
  });
}

co3_status co3_ari(const int* a, const int* b, int len, double* out) {
  if (!a || !b || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    *out = co3::ari(std::vector<int>(a, a + len), std::vector<int>(b, b + len));
    return CO3_OK;
  });
}

co3_status co3_bari(const int* rows_a, const int* cols_a, const int* rows_b,
                    const int* cols_b, int n, int p, double* out) {
  if (!rows_a || !cols_a || !rows_b || !cols_b || !out) {
    set_error("null argument");
    return CO3_ERR_INVALID_ARGUMENT;
  }
  return guard([&] {
    *out = co3::bari(std::vector<int>(rows_a, rows_a + n),
                     std::vector<int>(cols_a, cols_a + p),
                     std::vector<int>(rows_b, rows_b + n),
                     std::vector<int>(cols_b, cols_b + p));
    return CO3_OK;
  });
}

}  // extern "C"

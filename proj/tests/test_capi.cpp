#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "co3/co3.h"

TEST_CASE("version and error-state plumbing") {
  CHECK(std::strcmp(co3_version(), "0.1.0") == 0);
  co3_dataset* ds = nullptr;
  CHECK(co3_dataset_load_csv("no/such/file.csv", nullptr, &ds) == CO3_ERR_IO);
  CHECK(std::strlen(co3_last_error()) > 0);
}

TEST_CASE("options: set, dump, bad keys") {
  co3_options* opt = co3_options_new();
  CHECK(co3_options_set(opt, "d", "4") == CO3_OK);
  CHECK(co3_options_set(opt, "made_up", "1") == CO3_ERR_PARSE);
  char* dump = co3_options_dump(opt);
  CHECK(std::string(dump).find("d=4\n") != std::string::npos);
  co3_string_free(dump);
  co3_options_free(opt);
}

TEST_CASE("dataset create, accessors, csv round trip") {
  const int y[] = {1, 2, 2, 9};  // censored cell may carry anything
  const unsigned char delta[] = {1, 1, 1, 0};
  co3_dataset* ds = nullptr;
  REQUIRE(co3_dataset_create(2, 2, 2, y, delta, &ds) == CO3_OK);
  CHECK(co3_dataset_n(ds) == 2);
  CHECK(co3_dataset_p(ds) == 2);
  CHECK(co3_dataset_c(ds) == 2);
  CHECK(co3_dataset_y(ds, 0, 1) == 2);
  CHECK(co3_dataset_y(ds, 1, 1) == 0);  // sentinel
  CHECK(co3_dataset_observed(ds, 1, 1) == 0);

  const char* path = "co3_capi_roundtrip.csv";
  REQUIRE(co3_dataset_save_csv(ds, path) == CO3_OK);
  co3_dataset* back = nullptr;
  REQUIRE(co3_dataset_load_csv(path, nullptr, &back) == CO3_OK);
  CHECK(co3_dataset_y(back, 0, 0) == 1);
  CHECK(co3_dataset_observed(back, 1, 1) == 0);
  std::remove(path);
  co3_dataset_free(back);
  co3_dataset_free(ds);

  const int bad_y[] = {5, 1, 1, 1};
  co3_dataset* bad = nullptr;
  CHECK(co3_dataset_create(2, 2, 2, bad_y, delta, &bad) == CO3_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulate then fit through the C API") {
  co3_options* opt = co3_options_new();
  co3_options_set(opt, "sim_n", "15");
  co3_options_set(opt, "sim_p", "12");
  co3_options_set(opt, "sim_separation", "2");
  co3_options_set(opt, "seed", "11");

  co3_simulation* sim = nullptr;
  REQUIRE(co3_simulate(opt, &sim) == CO3_OK);
  const co3_dataset* data = co3_simulation_dataset(sim);
  CHECK(co3_dataset_n(data) == 15);
  CHECK(co3_simulation_censored(sim) <= co3_simulation_requested_censored(sim));
  const int* rt = co3_simulation_row_truth(sim);
  for (int i = 0; i < 15; ++i) {
    CHECK(rt[i] >= 0);
    CHECK(rt[i] < 3);
  }

  co3_options_set(opt, "iterations", "150");
  co3_options_set(opt, "burn_in", "75");
  co3_fit* fit = nullptr;
  REQUIRE(co3_fit_run(data, opt, &fit) == CO3_OK);
  CHECK(co3_fit_n(fit) == 15);
  CHECK(co3_fit_num_draws(fit) == 75);
  CHECK(std::isfinite(co3_fit_lpml(fit)));

  const double* sim_rows = co3_fit_row_similarity(fit);
  for (int i = 0; i < 15; ++i) CHECK(sim_rows[i * 15 + i] == 1.0);
  const int* part = co3_fit_row_partition(fit);
  for (int i = 0; i < 15; ++i) CHECK(part[i] >= 0);
  const int* draw0 = co3_fit_row_draw(fit, 0);
  CHECK(draw0[0] == 0);  // canonical labels start at zero
  CHECK(co3_fit_kn_trace(fit)[0] >= 1);
  CHECK(co3_fit_sigma1_trace(fit)[0] > 0.0);

  co3_fit_free(fit);
  co3_simulation_free(sim);
  co3_options_free(opt);
}

TEST_CASE("select_d over a small grid") {
  co3_options* opt = co3_options_new();
  co3_options_set(opt, "sim_n", "12");
  co3_options_set(opt, "sim_p", "12");
  co3_options_set(opt, "seed", "21");
  co3_simulation* sim = nullptr;
  REQUIRE(co3_simulate(opt, &sim) == CO3_OK);

  co3_options_set(opt, "iterations", "80");
  co3_lpml_grid* grid = nullptr;
  REQUIRE(co3_select_d(co3_simulation_dataset(sim), opt, 1, 2, &grid) == CO3_OK);
  REQUIRE(co3_lpml_grid_size(grid) == 2);
  CHECK(co3_lpml_grid_d(grid, 0) == 1);
  CHECK(co3_lpml_grid_d(grid, 1) == 2);
  CHECK(co3_lpml_grid_ok(grid, 0) == 1);
  const int best = co3_lpml_grid_best_d(grid);
  CHECK((best == 1 || best == 2));

  CHECK(co3_select_d(co3_simulation_dataset(sim), opt, 3, 2, &grid) ==
        CO3_ERR_INVALID_ARGUMENT);

  co3_lpml_grid_free(grid);
  co3_simulation_free(sim);
  co3_options_free(opt);
}

TEST_CASE("prior pmf and metrics") {
  co3_prior_pmf* pmf = nullptr;
  REQUIRE(co3_prior_k_pmf(5, 5, 0.1, 0.1, &pmf) == CO3_OK);
  double total = 0.0, expect = 0.0;
  for (int i = 0; i < co3_prior_pmf_size(pmf); ++i) {
    total += co3_prior_pmf_prob(pmf, i);
    expect += static_cast<double>(co3_prior_pmf_k(pmf, i)) * co3_prior_pmf_prob(pmf, i);
  }
  CHECK(std::abs(total - 1.0) < 1e-10);
  double ek = 0.0;
  REQUIRE(co3_expected_k(5, 5, 0.1, 0.1, &ek) == CO3_OK);
  CHECK(std::abs(ek - expect) < 1e-8);
  co3_prior_pmf_free(pmf);

  CHECK(co3_prior_k_pmf(0, 5, 1.0, 1.0, &pmf) == CO3_ERR_INVALID_ARGUMENT);

  const int a[] = {0, 0, 1, 1};
  const int b[] = {0, 1, 0, 1};
  double v = 0.0;
  REQUIRE(co3_ari(a, a, 4, &v) == CO3_OK);
  CHECK(v == 1.0);
  REQUIRE(co3_ari(a, b, 4, &v) == CO3_OK);
  CHECK(v == doctest::Approx(-0.5));

  const int rows[] = {0, 0, 1};
  const int cols[] = {0, 1, 1};
  const int rows_s[] = {0, 1, 2};
  REQUIRE(co3_bari(rows, cols, rows, cols, 3, 3, &v) == CO3_OK);
  CHECK(v == 1.0);
  REQUIRE(co3_bari(rows, cols, rows_s, cols, 3, 3, &v) == CO3_OK);
  CHECK(v < 1.0);
}

TEST_CASE("null arguments are rejected, not crashed on") {
  CHECK(co3_options_set(nullptr, "d", "1") == CO3_ERR_INVALID_ARGUMENT);
  CHECK(co3_simulate(nullptr, nullptr) == CO3_ERR_INVALID_ARGUMENT);
  double v;
  CHECK(co3_ari(nullptr, nullptr, 3, &v) == CO3_ERR_INVALID_ARGUMENT);
}

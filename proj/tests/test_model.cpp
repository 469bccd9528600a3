#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mathutil.hpp"
#include "model.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace co3;

TEST_CASE("default cutoffs: equispaced symmetric grid") {
  auto c2 = make_default_cutoffs(2);
  REQUIRE(c2.gamma.size() == 3);
  CHECK(std::isinf(c2.gamma[0]));
  CHECK(c2.gamma[1] == doctest::Approx(0.0));
  CHECK(std::isinf(c2.gamma[2]));

  auto c3 = make_default_cutoffs(3);
  CHECK(c3.gamma[1] == doctest::Approx(-0.5));
  CHECK(c3.gamma[2] == doctest::Approx(0.5));

  auto c5 = make_default_cutoffs(5);
  CHECK(c5.gamma[1] == doctest::Approx(-1.5));
  CHECK(c5.gamma[2] == doctest::Approx(-0.5));
  CHECK(c5.gamma[3] == doctest::Approx(0.5));
  CHECK(c5.gamma[4] == doctest::Approx(1.5));

  CHECK_THROWS_AS(make_default_cutoffs(1), std::invalid_argument);
}

TEST_CASE("default cutoffs strictly increasing for c in 2..50") {
  for (int c = 2; c <= 50; ++c) {
    auto cut = make_default_cutoffs(c);
    REQUIRE(static_cast<int>(cut.gamma.size()) == c + 1);
    for (int k = 1; k <= c; ++k) CHECK(cut.gamma[k - 1] < cut.gamma[k]);
  }
}

TEST_CASE("category_of inverts the cutoff map") {
  auto cut = make_default_cutoffs(4);
  CHECK(cut.category_of(-5.0) == 1);
  CHECK(cut.category_of(-1.0) == 1);  // boundary: gamma_1 = -1 belongs to cell 1
  CHECK(cut.category_of(-0.5) == 2);
  CHECK(cut.category_of(0.7) == 3);
  CHECK(cut.category_of(3.0) == 4);
}

TEST_CASE("entry likelihood: closed-form cases") {
  auto cut = make_default_cutoffs(2);
  CHECK(entry_likelihood(0, false, 0.0, 0.0, 1.0, 1.0, cut) == doctest::Approx(0.5));
  CHECK(entry_likelihood(2, true, 0.0, 0.0, 1.0, 1.0, cut) == doctest::Approx(0.25));
  CHECK_THROWS_AS(entry_likelihood(3, true, 0.0, 0.0, 1.0, 1.0, cut),
                  std::invalid_argument);
  CHECK_THROWS_AS(entry_likelihood(0, true, 0.0, 0.0, 1.0, 1.0, cut),
                  std::invalid_argument);
}

TEST_CASE("entry likelihood matches quadrature over the latent cell") {
  // y=2 of c=3, mz=0.3, sigma1^2=0.1, mw=1, sigma2^2=1.5
  auto cut = make_default_cutoffs(3);
  const double mz = 0.3, s1sq = 0.1, mw = 1.0, s2sq = 1.5;
  const double cell = oracle::simpson(
      [&](double z) { return oracle::normal_pdf(z, mz, s1sq); }, -0.5, 0.5, 20000);
  const double wmass = oracle::simpson(
      [&](double w) { return oracle::normal_pdf(w, mw, s2sq); }, 0.0,
      mw + 14.0 * std::sqrt(s2sq), 20000);
  const double expected = cell * wmass;
  CHECK(entry_likelihood(2, true, mz, mw, s1sq, s2sq, cut) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("entry likelihood sums to one over the augmented outcome space") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int c = 2 + static_cast<int>(rng.below(6));
    auto cut = make_default_cutoffs(c);
    const double mz = rng.normal(0.0, 2.0);
    const double mw = rng.normal(0.0, 2.0);
    const double s1 = 0.1 + rng.uniform() * 3.0;
    const double s2 = 0.1 + rng.uniform() * 3.0;
    double total = entry_likelihood(0, false, mz, mw, s1, s2, cut);
    for (int y = 1; y <= c; ++y) total += entry_likelihood(y, true, mz, mw, s1, s2, cut);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("entry likelihood is floored, never zero") {
  auto cut = make_default_cutoffs(3);
  const double v = entry_likelihood(2, true, 500.0, 0.0, 0.01, 1.0, cut);
  CHECK(v >= kProbFloor);
  CHECK(std::isfinite(std::log(v)));
}

TEST_CASE("canonical labels: idempotent and permutation invariant") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(12));
    std::vector<int> labels(n);
    for (int& l : labels) l = static_cast<int>(rng.below(5));
    const auto canon = canonical_labels(labels);
    CHECK(canonical_labels(canon) == canon);

    // relabel clusters by a random injective map; canonical form is unchanged
    std::vector<int> perm{7, 3, 9, 0, 5};
    std::vector<int> relabeled(n);
    for (int i = 0; i < n; ++i) relabeled[i] = perm[labels[i]];
    CHECK(canonical_labels(relabeled) == canon);
  }
}

TEST_CASE("canonical labels use first-appearance order from zero") {
  CHECK(canonical_labels({5, 5, 2, 5, 9}) == std::vector<int>{0, 0, 1, 0, 2});
  CHECK(num_clusters({5, 5, 2, 5, 9}) == 3);
}

TEST_CASE("dataset validation names the offending cell") {
  CHECK_THROWS_AS(Dataset::create(0, 1, 2, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Dataset::create(1, 1, 1, {1}, {1}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(Dataset::create(1, 2, 2, {1, 3}, {1, 1}),
                       doctest::Contains("row 1, column 2"), std::invalid_argument);

  // censored entries may carry arbitrary codes; they are stored as sentinel
  auto ds = Dataset::create(1, 2, 2, {1, 42}, {1, 0});
  CHECK(ds.code(0, 1) == 0);
  CHECK_FALSE(ds.observed(0, 1));
}

TEST_CASE("state validation catches cell violations") {
  auto data = Dataset::create(2, 2, 2, {1, 2, 2, 1}, {1, 1, 1, 1});
  auto cut = make_default_cutoffs(2);

  LatentState st;
  st.z.resize(2, 2);
  st.w.resize(2, 2);
  st.z << -1.0, 1.0, 1.0, -1.0;
  st.w.setConstant(1.0);
  st.row_labels = {0, 0};
  st.col_labels = {0, 1};
  st.theta1 = {Eigen::MatrixXd::Zero(1, 2)};
  st.theta2 = {Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 2)};
  st.row_counts = {2};
  st.col_counts = {1, 1};
  CHECK_NOTHROW(validate_state(st, data, cut));

  auto bad = st;
  bad.z(0, 0) = 0.5;  // y=1 cell is (-inf, 0]
  CHECK_THROWS_AS(validate_state(bad, data, cut), std::logic_error);

  bad = st;
  bad.w(1, 1) = -0.5;  // observed cell needs w >= 0
  CHECK_THROWS_AS(validate_state(bad, data, cut), std::logic_error);

  bad = st;
  bad.row_counts = {1};  // stale counts
  CHECK_THROWS_AS(validate_state(bad, data, cut), std::logic_error);
}

TEST_CASE("norm_quantile inverts norm_cdf") {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9}) {
    const double x = norm_quantile(p);
    CHECK(norm_cdf(x) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(norm_quantile(0.0), std::invalid_argument);
}

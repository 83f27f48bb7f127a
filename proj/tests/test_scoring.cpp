#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sugs/scoring.hpp"
#include "support/quadrature.hpp"

using namespace sugs;

namespace {

SwitchVector all_on(std::size_t d) { return SwitchVector::all_on(d); }

SwitchVector all_off(std::size_t d) {
  SwitchVector g;
  g.gamma.assign(d, 0);
  return g;
}

Matrix column(const std::vector<double>& xs) {
  Matrix m(xs.size(), 1);
  for (std::size_t r = 0; r < xs.size(); ++r) m(r, 0) = xs[r];
  return m;
}

}  // namespace

TEST_CASE("model marginal likelihood") {
  SUBCASE("one cluster, all switches on: equals the plain marginal") {
    Matrix data = column({0.4, -1.0, 2.1, 0.3});
    Hyperparameters h({0.0}, 0.8, 2.0, 0.7);
    std::vector<int> z(4, 0);
    ClusterState s = ClusterState::prior(h);
    for (std::size_t r = 0; r < 4; ++r) s.add(data.row(r));
    CHECK(log_marginal_likelihood_model(data, z, all_on(1), h) ==
          doctest::Approx(s.log_marginal_likelihood(h)).epsilon(1e-12));
  }
  SUBCASE("all switches off: independent of the partition") {
    Matrix data = column({0.4, -1.0, 2.1, 0.3});
    Hyperparameters h({0.0}, 0.8, 2.0, 0.7);
    std::vector<int> one(4, 0);
    std::vector<int> split = {0, 1, 0, 1};
    CHECK(log_marginal_likelihood_model(data, one, all_off(1), h) ==
          log_marginal_likelihood_model(data, split, all_off(1), h));
  }
  SUBCASE("two clusters match a per-cluster quadrature product") {
    Matrix data = column({-2.0, -1.6, 1.9, 2.4});
    Hyperparameters h({0.0}, 0.8, 2.0, 0.7);
    std::vector<int> z = {0, 0, 1, 1};
    double got = log_marginal_likelihood_model(data, z, all_on(1), h);
    double want =
        oracle::log_marginal_quadrature(std::vector<double>{-2.0, -1.6}, 0.0,
                                        0.8, 2.0, 0.7) +
        oracle::log_marginal_quadrature(std::vector<double>{1.9, 2.4}, 0.0,
                                        0.8, 2.0, 0.7);
    CHECK(std::abs(got - want) <= 1e-6 * std::abs(want));
  }
  SUBCASE("invariant to relabelling and row order") {
    Rng rng(3);
    Matrix data(12, 2);
    for (double& v : data.values) v = rng.normal();
    Hyperparameters h = Hyperparameters::data_defaults(data);
    std::vector<int> z = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
    std::vector<int> relabeled = {2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1};
    double a = log_marginal_likelihood_model(data, z, all_on(2), h);
    CHECK(a == log_marginal_likelihood_model(data, relabeled, all_on(2), h));

    // reverse rows together with labels
    Matrix rev(12, 2);
    std::vector<int> z_rev(12);
    for (std::size_t r = 0; r < 12; ++r) {
      rev(r, 0) = data(11 - r, 0);
      rev(r, 1) = data(11 - r, 1);
      z_rev[r] = z[11 - r];
    }
    double b = log_marginal_likelihood_model(rev, z_rev, all_on(2), h);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
  SUBCASE("appending a far outlier lowers the total") {
    Matrix tight = column({0.0, 0.1, -0.1, 0.05});
    Hyperparameters h({0.0}, 0.8, 2.0, 0.7);
    std::vector<int> z(4, 0);
    double before = log_marginal_likelihood_model(tight, z, all_on(1), h);
    Matrix with_outlier = column({0.0, 0.1, -0.1, 0.05, 40.0});
    std::vector<int> z5(5, 0);
    double after =
        log_marginal_likelihood_model(with_outlier, z5, all_on(1), h);
    CHECK(after < before);
  }
  SUBCASE("empty cluster label is rejected") {
    Matrix data = column({1.0, 2.0});
    Hyperparameters h({0.0}, 1, 1, 1);
    std::vector<int> z = {0, 2};
    CHECK_THROWS_AS(log_marginal_likelihood_model(data, z, all_on(1), h),
                    invalid_input);
  }
}

TEST_CASE("pseudo-marginal likelihood") {
  BetaGrid grid = BetaGrid::defaults();
  SUBCASE("single observation gives the prior predictive") {
    Matrix data = column({1.7});
    Hyperparameters h({0.0}, 0.8, 2.0, 0.7);
    std::vector<int> z = {0};
    double got = log_pseudo_marginal_likelihood(data, z, all_on(1), h, grid,
                                                PmlMode::exact_loo);
    double want = ClusterState::prior(h).predictive_log_density(data.row(0));
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
  SUBCASE("exact and approximate modes converge as n grows") {
    Hyperparameters base({0.0}, 0.8, 2.0, 0.7);
    double prev = 1e300;
    for (std::size_t n : {20u, 100u, 500u}) {
      Rng rng(n);
      Matrix data(n, 1);
      std::vector<int> z(n);
      for (std::size_t r = 0; r < n; ++r) {
        bool hi = r % 2 == 0;
        data(r, 0) = (hi ? 2.0 : -2.0) + rng.normal();
        z[r] = hi ? 0 : 1;
      }
      double exact = log_pseudo_marginal_likelihood(data, z, all_on(1), base,
                                                    grid, PmlMode::exact_loo);
      double approx = log_pseudo_marginal_likelihood(
          data, z, all_on(1), base, grid, PmlMode::full_data_approx);
      double gap = std::abs(exact - approx) / static_cast<double>(n);
      CHECK(gap < prev);
      prev = gap;
    }
  }
  SUBCASE("relabelling does not change the value") {
    Rng rng(17);
    Matrix data(15, 2);
    for (double& v : data.values) v = rng.normal();
    Hyperparameters h = Hyperparameters::data_defaults(data);
    std::vector<int> z = {0, 1, 0, 1, 2, 2, 0, 1, 2, 0, 0, 1, 2, 1, 0};
    std::vector<int> relabeled(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) relabeled[i] = (z[i] + 1) % 3;
    // relabeled must stay compact: 0,1,2 all occur
    double a = log_pseudo_marginal_likelihood(data, z, all_on(2), h, grid,
                                              PmlMode::exact_loo);
    double b = log_pseudo_marginal_likelihood(data, relabeled, all_on(2), h,
                                              grid, PmlMode::exact_loo);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  SUBCASE("singleton cluster falls back to the prior predictive") {
    Matrix data = column({0.0, 0.2, 9.0});
    Hyperparameters h({0.0}, 0.8, 2.0, 0.7);
    std::vector<int> z = {0, 0, 1};
    double v = log_pseudo_marginal_likelihood(data, z, all_on(1), h, grid,
                                              PmlMode::exact_loo);
    CHECK(std::isfinite(v));
  }
  SUBCASE("parallel kernel matches the serial reference bitwise") {
    Rng rng(23);
    Matrix data(60, 3);
    for (double& v : data.values) v = rng.normal();
    Hyperparameters h = Hyperparameters::data_defaults(data);
    std::vector<int> z(60);
    for (std::size_t r = 0; r < 60; ++r) z[r] = static_cast<int>(r % 4);
    double a = log_pseudo_marginal_likelihood(data, z, all_on(3), h, grid,
                                              PmlMode::exact_loo);
    double b = log_pseudo_marginal_likelihood_serial(
        data, z, all_on(3), h, grid, PmlMode::exact_loo);
    CHECK(a == b);
  }
}

TEST_CASE("best-model selection") {
  FittedModel a;
  a.log_ml = -10.0;
  a.provenance = {0, 0, 1};
  FittedModel b;
  b.log_ml = -5.0;
  b.provenance = {0, 1, 1};
  SUBCASE("singleton set returns its model") {
    std::vector<FittedModel> set = {a};
    CHECK(&select_best(set, Criterion::ml) == &set[0]);
  }
  SUBCASE("larger log marginal likelihood wins") {
    std::vector<FittedModel> set = {a, b};
    CHECK(select_best(set, Criterion::ml).log_ml == doctest::Approx(-5.0));
  }
  SUBCASE("ties keep the earlier model") {
    FittedModel c = a;
    c.provenance = {1, 0, 1};
    std::vector<FittedModel> set = {a, c};
    CHECK(select_best(set, Criterion::ml).provenance.subsample == 0);
  }
  SUBCASE("pml criterion requires pml scores") {
    std::vector<FittedModel> set = {a};
    CHECK_THROWS_AS(select_best(set, Criterion::pml), invalid_input);
    set[0].log_pml = -3.0;
    CHECK(*select_best(set, Criterion::pml).log_pml == doctest::Approx(-3.0));
  }
  SUBCASE("empty set is an error") {
    std::vector<FittedModel> none;
    CHECK_THROWS_AS(select_best(none, Criterion::ml), invalid_input);
  }
}

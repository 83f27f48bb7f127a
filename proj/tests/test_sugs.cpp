#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sugs/sugs.hpp"
#include "support/quadrature.hpp"

using namespace sugs;

namespace {

std::vector<int> identity_ordering(std::size_t n) {
  std::vector<int> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  return ord;
}

}  // namespace

TEST_CASE("crp prior probabilities") {
  SUBCASE("symmetric two-way case") {
    std::vector<std::size_t> counts = {1};
    auto p = crp_log_prior(counts, 1.0, 2);
    CHECK(p[0] == doctest::Approx(std::log(0.5)));
    CHECK(p[1] == doctest::Approx(std::log(0.5)));
  }
  SUBCASE("counts [3,1] with beta 1 at i = 5") {
    std::vector<std::size_t> counts = {3, 1};
    auto p = crp_log_prior(counts, 1.0, 5);
    CHECK(p[0] == doctest::Approx(std::log(3.0 / 5.0)));
    CHECK(p[1] == doctest::Approx(std::log(1.0 / 5.0)));
    CHECK(p[2] == doctest::Approx(std::log(1.0 / 5.0)));
  }
  SUBCASE("probabilities sum to one") {
    std::vector<std::size_t> counts = {4, 2, 1};
    auto p = crp_log_prior(counts, 3.7, 8);
    double total = 0.0;
    for (double v : p) total += std::exp(v);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("new-cluster mass is monotone in beta and tends to one") {
    std::vector<std::size_t> counts = {5, 3};
    double prev = -1.0;
    for (double beta : {0.1, 1.0, 10.0, 1e4, 1e8}) {
      double p_new = std::exp(crp_log_prior(counts, beta, 9).back());
      CHECK(p_new > prev);
      prev = p_new;
    }
    CHECK(prev > 0.999);
  }
  SUBCASE("zero-count cluster is an internal error") {
    std::vector<std::size_t> counts = {2, 0};
    CHECK_THROWS_AS(crp_log_prior(counts, 1.0, 3), numerical_error);
  }
  SUBCASE("counts must sum to i-1") {
    std::vector<std::size_t> counts = {2, 2};
    CHECK_THROWS_AS(crp_log_prior(counts, 1.0, 3), invalid_input);
  }
}

TEST_CASE("default grid matches the documented values") {
  BetaGrid g = BetaGrid::defaults();
  std::vector<double> want = {0.01, 0.1, 1, 5, 10, 15, 30, 50, 100};
  CHECK(g.values == want);
  double total = 0.0;
  for (double k : g.kappa) total += k;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // Exp(1) density ratios between grid points
  CHECK(g.kappa[2] / g.kappa[0] ==
        doctest::Approx(std::exp(-(1.0 - 0.01))).epsilon(1e-12));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(BetaGrid({1.0, -2.0}, {0.5, 0.5}), invalid_input);
  CHECK_THROWS_AS(BetaGrid({1.0}, {0.5, 0.5}), invalid_input);
  CHECK_THROWS_AS(BetaGrid({}, {}), invalid_input);
}

TEST_CASE("grid posterior starts at the prior and stays normalised") {
  BetaGrid g = BetaGrid::defaults();
  BetaPosterior phi = BetaPosterior::prior(g);
  CHECK(log_sum_exp(phi.log_phi) == doctest::Approx(0.0).epsilon(1e-12));
}

namespace {

// direct composition of the fixed-beta allocation posterior from its parts:
// pi_ik * L_ik normalised, with the t densities written independently
std::vector<double> fixed_beta_allocation(
    double x, const std::vector<ClusterState>& clusters,
    const ClusterState& prior_state, const std::vector<std::size_t>& counts,
    double beta, std::size_t i) {
  auto t_log = [](const ClusterState& s, double v) {
    double scale2 = (1.0 + s.lambda()) / s.lambda() * s.nu_s(0) / s.nu();
    return oracle::student_t_logpdf(v, s.mean(0), scale2, s.nu());
  };
  std::vector<double> crp = crp_log_prior(counts, beta, i);
  std::vector<double> score(crp.size());
  for (std::size_t k = 0; k < clusters.size(); ++k)
    score[k] = crp[k] + t_log(clusters[k], x);
  score.back() = crp.back() + t_log(prior_state, x);
  double norm = log_sum_exp(score);
  for (double& s : score) s -= norm;
  return score;
}

}  // namespace

TEST_CASE("allocation posterior") {
  Hyperparameters h({0.0}, 0.5, 2.0, 0.8);
  ClusterState prior = ClusterState::prior(h);
  std::vector<ClusterState> clusters;
  clusters.push_back(prior.added(std::vector<double>{1.5})
                         .added(std::vector<double>{1.1}));
  clusters.push_back(prior.added(std::vector<double>{-2.0}));
  std::vector<std::size_t> counts = {2, 1};

  SUBCASE("single grid point reduces to the fixed-beta posterior") {
    BetaGrid g = BetaGrid::single(1.0);
    BetaPosterior phi = BetaPosterior::prior(g);
    std::vector<double> x = {0.4};
    auto got =
        allocation_log_posterior(x, clusters, prior, counts, g, phi, 4);
    auto want = fixed_beta_allocation(0.4, clusters, prior, counts, 1.0, 4);
    for (std::size_t k = 0; k < got.size(); ++k)
      CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
  }
  SUBCASE("normalised for any grid") {
    BetaGrid g = BetaGrid::defaults();
    BetaPosterior phi = BetaPosterior::prior(g);
    std::vector<double> x = {0.4};
    auto got =
        allocation_log_posterior(x, clusters, prior, counts, g, phi, 4);
    CHECK(log_sum_exp(got) == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("identical clusters get identical posterior entries") {
    std::vector<ClusterState> twins;
    twins.push_back(prior.added(std::vector<double>{0.7}));
    twins.push_back(prior.added(std::vector<double>{0.7}));
    std::vector<std::size_t> twin_counts = {1, 1};
    BetaGrid g = BetaGrid::defaults();
    BetaPosterior phi = BetaPosterior::prior(g);
    std::vector<double> x = {0.1};
    auto got =
        allocation_log_posterior(x, twins, prior, twin_counts, g, phi, 3);
    CHECK(got[0] == doctest::Approx(got[1]).epsilon(1e-14));
  }
}

TEST_CASE("grid posterior update") {
  SUBCASE("degenerate grid stays put") {
    BetaGrid g = BetaGrid::single(2.0);
    BetaPosterior phi = BetaPosterior::prior(g);
    std::vector<std::size_t> counts = {2};
    BetaPosterior next = update_phi(phi, 0, counts, g, 3);
    CHECK(next.log_phi[0] == doctest::Approx(0.0));
  }
  SUBCASE("a new cluster shifts weight toward larger grid values") {
    BetaGrid g = BetaGrid::defaults();
    BetaPosterior phi = BetaPosterior::prior(g);
    std::vector<std::size_t> counts = {3, 1};
    BetaPosterior next = update_phi(phi, 2, counts, g, 5);  // opened cluster
    double prev_ratio = -1e300;
    for (std::size_t l = 0; l < g.size(); ++l) {
      double ratio = next.log_phi[l] - phi.log_phi[l];
      CHECK(ratio > prev_ratio);
      prev_ratio = ratio;
    }
  }
  SUBCASE("three-step recursion matches a direct evaluation") {
    BetaGrid g({0.5, 5.0}, {0.5, 0.5});
    BetaPosterior phi = BetaPosterior::prior(g);
    // assignments: i=2 joins cluster 0, i=3 opens cluster 1, i=4 joins 0
    std::vector<std::vector<std::size_t>> counts_at = {{1}, {2}, {2, 1}};
    std::vector<std::size_t> chosen = {0, 1, 0};
    for (std::size_t step = 0; step < 3; ++step)
      phi = update_phi(phi, chosen[step], counts_at[step], g, step + 2);

    // direct product per grid value
    auto direct = [&](double beta) {
      double v = 0.5;
      v *= 1.0 / (beta + 1.0);   // join size-1 cluster at i=2
      v *= beta / (beta + 2.0);  // open at i=3
      v *= 2.0 / (beta + 3.0);   // join size-2 cluster at i=4
      return v;
    };
    double w0 = direct(0.5), w1 = direct(5.0);
    CHECK(std::exp(phi.log_phi[0]) ==
          doctest::Approx(w0 / (w0 + w1)).epsilon(1e-12));
    CHECK(std::exp(phi.log_phi[1]) ==
          doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
  }
}

TEST_CASE("closed-form grid posterior equals the sequential recursion") {
  Rng rng(7);
  Matrix data(12, 2);
  for (double& v : data.values) v = rng.normal();
  Hyperparameters h = Hyperparameters::data_defaults(data);
  BetaGrid g = BetaGrid::defaults();
  SugsFit fit = sugs_pass(data, identity_ordering(12), {}, h, g);
  BetaPosterior direct = beta_posterior_for_partition(fit.z, g);
  for (std::size_t l = 0; l < g.size(); ++l)
    CHECK(fit.beta_posterior.log_phi[l] ==
          doctest::Approx(direct.log_phi[l]).epsilon(1e-10));
}

TEST_CASE("sugs pass") {
  BetaGrid grid = BetaGrid::defaults();
  SUBCASE("single observation forms a single cluster") {
    Matrix data(1, 1);
    data(0, 0) = 3.0;
    Hyperparameters h({3.0}, 0.01, 1.0, 0.2);
    SugsFit fit = sugs_pass(data, identity_ordering(1), {}, h, grid);
    CHECK(fit.z == std::vector<int>{0});
    CHECK(fit.n_clusters() == 1);
  }
  SUBCASE("far-separated points split into two clusters") {
    Matrix data(2, 1);
    data(0, 0) = -100.0;
    data(1, 0) = 100.0;
    Hyperparameters h = Hyperparameters::data_defaults(data);
    SugsFit fit = sugs_pass(data, identity_ordering(2), {}, h, grid);
    CHECK(fit.n_clusters() == 2);
  }
  SUBCASE("first processed observation opens cluster 0") {
    Matrix data(3, 1);
    data(0, 0) = 0.0;
    data(1, 0) = 0.1;
    data(2, 0) = -0.1;
    Hyperparameters h = Hyperparameters::data_defaults(data);
    std::vector<int> ordering = {2, 0, 1};
    SugsFit fit = sugs_pass(data, ordering, {}, h, grid);
    CHECK(fit.z[2] == 0);
  }
  SUBCASE("deterministic: identical inputs give identical fits") {
    Rng rng(5);
    Matrix data(25, 3);
    for (double& v : data.values) v = rng.normal();
    Hyperparameters h = Hyperparameters::data_defaults(data);
    Rng ord_rng(9);
    std::vector<int> ordering = random_permutation(25, ord_rng);
    SugsFit a = sugs_pass(data, ordering, {}, h, grid);
    SugsFit b = sugs_pass(data, ordering, {}, h, grid);
    CHECK(a.z == b.z);
    CHECK(a.beta_posterior.log_phi == b.beta_posterior.log_phi);
  }
  SUBCASE("labels are compact and counts match") {
    Rng rng(11);
    Matrix data(40, 2);
    for (double& v : data.values) v = 3.0 * rng.normal();
    Hyperparameters h = Hyperparameters::data_defaults(data);
    SugsFit fit = sugs_pass(data, identity_ordering(40), {}, h, grid);
    std::vector<std::size_t> counts(fit.n_clusters(), 0);
    for (int z : fit.z) {
      REQUIRE(z >= 0);
      REQUIRE(static_cast<std::size_t>(z) < fit.n_clusters());
      ++counts[z];
    }
    std::size_t total = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      CHECK(counts[k] > 0);
      CHECK(counts[k] == fit.clusters[k].count());
      total += counts[k];
    }
    CHECK(total == 40);
  }
  SUBCASE("switched-off variables never influence the partition") {
    Rng rng(13);
    Matrix data(30, 4);
    for (double& v : data.values) v = rng.normal();
    for (std::size_t r = 0; r < 15; ++r) data(r, 0) += 6.0;  // real structure
    Hyperparameters h = Hyperparameters::data_defaults(data);
    std::vector<std::uint8_t> gamma = {1, 1, 0, 0};
    SugsFit base = sugs_pass(data, identity_ordering(30), gamma, h, grid);

    // permute the masked columns across observations
    Matrix scrambled = data;
    for (std::size_t c = 2; c < 4; ++c) {
      for (std::size_t r = 30; r > 1; --r) {
        std::size_t j = rng.bounded(r);
        std::swap(scrambled(r - 1, c), scrambled(j, c));
      }
    }
    SugsFit moved = sugs_pass(scrambled, identity_ordering(30), gamma, h, grid);
    CHECK(base.z == moved.z);
  }
  SUBCASE("input validation") {
    Matrix data(3, 1);
    Hyperparameters h({0.0}, 1, 1, 1);
    std::vector<int> bad = {0, 0, 2};
    CHECK_THROWS_AS(sugs_pass(data, bad, {}, h, grid), invalid_input);
    std::vector<int> short_ord = {0, 1};
    CHECK_THROWS_AS(sugs_pass(data, short_ord, {}, h, grid), invalid_input);
  }
}

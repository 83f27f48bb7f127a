#include "sugs/sugs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sugs {

BetaGrid::BetaGrid(std::vector<double> values_, std::vector<double> kappa_)
    : values(std::move(values_)), kappa(std::move(kappa_)) {
  if (values.empty() || values.size() != kappa.size())
    throw invalid_input("beta grid needs matching non-empty values/kappa");
  double total = 0.0;
  for (std::size_t l = 0; l < values.size(); ++l) {
    if (!(values[l] > 0.0)) throw invalid_input("beta grid values must be > 0");
    if (!(kappa[l] > 0.0)) throw invalid_input("kappa weights must be > 0");
    total += kappa[l];
  }
  for (double& k : kappa) k /= total;
}

BetaGrid BetaGrid::defaults() {
  return with_exp_prior({0.01, 0.1, 1, 5, 10, 15, 30, 50, 100});
}

BetaGrid BetaGrid::single(double beta) { return BetaGrid({beta}, {1.0}); }

BetaGrid BetaGrid::with_exp_prior(std::vector<double> values_) {
  // Gamma(1,1) density at each grid point, normalised on construction.
  // Computed via exp(max - b) to keep weights representable for large grids.
  double lo = *std::min_element(values_.begin(), values_.end());
  std::vector<double> kappa_;
  kappa_.reserve(values_.size());
  for (double b : values_) kappa_.push_back(std::exp(lo - b));
  return BetaGrid(std::move(values_), std::move(kappa_));
}

BetaGrid BetaGrid::with_uniform_prior(std::vector<double> values_) {
  std::vector<double> kappa_(values_.size(), 1.0);
  return BetaGrid(std::move(values_), std::move(kappa_));
}

BetaPosterior BetaPosterior::prior(const BetaGrid& grid) {
  BetaPosterior p;
  p.log_phi.reserve(grid.size());
  for (double k : grid.kappa) p.log_phi.push_back(std::log(k));
  double norm = log_sum_exp(p.log_phi);
  for (double& v : p.log_phi) v -= norm;
  return p;
}

std::vector<double> crp_log_prior(std::span<const std::size_t> counts,
                                  double beta, std::size_t i) {
  if (i < 2) throw invalid_input("crp_log_prior requires i >= 2");
  if (!(beta > 0.0)) throw invalid_input("beta must be > 0");
  std::size_t total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0)
      throw numerical_error("existing cluster " + std::to_string(k) +
                            " has zero count");
    total += counts[k];
  }
  if (total != i - 1)
    throw invalid_input("cluster sizes sum to " + std::to_string(total) +
                        ", expected i-1 = " + std::to_string(i - 1));
  double log_denom = std::log(beta + static_cast<double>(i - 1));
  std::vector<double> out(counts.size() + 1);
  for (std::size_t k = 0; k < counts.size(); ++k)
    out[k] = std::log(static_cast<double>(counts[k])) - log_denom;
  out[counts.size()] = std::log(beta) - log_denom;
  return out;
}

namespace {

// log sum_l phi_l / (beta_l + i - 1) and log sum_l phi_l beta_l / (beta_l + i - 1);
// the pieces of the grid-marginalised CRP weights shared by all clusters.
struct MarginalCrp {
  double log_existing;  // add log n_k for cluster k
  double log_new;
};

MarginalCrp marginal_crp(const BetaGrid& grid, const BetaPosterior& phi,
                         std::size_t i) {
  const std::size_t L = grid.size();
  std::vector<double> a(L), b(L);
  for (std::size_t l = 0; l < L; ++l) {
    double log_denom = std::log(grid.values[l] + static_cast<double>(i - 1));
    a[l] = phi.log_phi[l] - log_denom;
    b[l] = a[l] + std::log(grid.values[l]);
  }
  return {log_sum_exp(a), log_sum_exp(b)};
}

}  // namespace

std::vector<double> allocation_log_posterior(
    std::span<const double> x, const std::vector<ClusterState>& clusters,
    const ClusterState& new_cluster_state, std::span<const std::size_t> counts,
    const BetaGrid& grid, const BetaPosterior& phi, std::size_t i) {
  if (counts.size() != clusters.size())
    throw invalid_input("counts/clusters size mismatch");
  MarginalCrp crp = marginal_crp(grid, phi, i);
  std::vector<double> score(clusters.size() + 1);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    score[k] = std::log(static_cast<double>(counts[k])) + crp.log_existing +
               clusters[k].predictive_log_density(x);
  }
  score[clusters.size()] =
      crp.log_new + new_cluster_state.predictive_log_density(x);
  double norm = log_sum_exp(score);
  if (!std::isfinite(norm))
    throw numerical_error("allocation posterior underflowed to zero mass");
  for (double& s : score) s -= norm;
  return score;
}

BetaPosterior update_phi(const BetaPosterior& phi, std::size_t chosen_k,
                         std::span<const std::size_t> counts,
                         const BetaGrid& grid, std::size_t i) {
  const std::size_t L = grid.size();
  BetaPosterior out;
  out.log_phi.resize(L);
  bool new_cluster = chosen_k >= counts.size();
  for (std::size_t l = 0; l < L; ++l) {
    double log_denom = std::log(grid.values[l] + static_cast<double>(i - 1));
    double log_pi = new_cluster
                        ? std::log(grid.values[l]) - log_denom
                        : std::log(static_cast<double>(counts[chosen_k])) -
                              log_denom;
    out.log_phi[l] = phi.log_phi[l] + log_pi;
  }
  double norm = log_sum_exp(out.log_phi);
  if (!std::isfinite(norm))
    throw numerical_error("grid posterior underflowed to zero mass");
  for (double& v : out.log_phi) v -= norm;
  return out;
}

BetaPosterior beta_posterior_for_partition(std::span<const int> z,
                                           const BetaGrid& grid) {
  const std::size_t n = z.size();
  int n_clusters = 0;
  for (int label : z) n_clusters = std::max(n_clusters, label + 1);
  BetaPosterior out;
  out.log_phi.resize(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) {
    double beta = grid.values[l];
    double v = std::log(grid.kappa[l]) +
               static_cast<double>(n_clusters - 1) * std::log(beta);
    for (std::size_t i = 2; i <= n; ++i)
      v -= std::log(beta + static_cast<double>(i - 1));
    out.log_phi[l] = v;
  }
  double norm = log_sum_exp(out.log_phi);
  for (double& v : out.log_phi) v -= norm;
  return out;
}

SugsFit sugs_pass(const Matrix& data, std::span<const int> ordering,
                  std::span<const std::uint8_t> gamma,
                  const Hyperparameters& hyper, const BetaGrid& grid) {
  const std::size_t n = data.rows;
  const std::size_t n_vars = data.cols;
  if (n == 0) throw invalid_input("sugs_pass needs at least one observation");
  if (hyper.n_vars() != n_vars)
    throw invalid_input("hyperparameter dimension mismatch");
  if (!gamma.empty() && gamma.size() != n_vars)
    throw invalid_input("gamma dimension mismatch");
  if (ordering.size() != n)
    throw invalid_input("ordering must cover every observation");
  {
    std::vector<std::uint8_t> seen(n, 0);
    for (int idx : ordering) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= n || seen[idx])
        throw invalid_input("ordering is not a permutation of 0..n-1");
      seen[idx] = 1;
    }
  }

  std::vector<std::size_t> active;
  if (gamma.empty()) {
    active.resize(n_vars);
    std::iota(active.begin(), active.end(), std::size_t{0});
  } else {
    for (std::size_t d = 0; d < n_vars; ++d)
      if (gamma[d]) active.push_back(d);
  }
  const Matrix x_act = data.select_columns(active);
  const Hyperparameters hyper_act = hyper.restricted(active);
  const ClusterState prior_state = ClusterState::prior(hyper_act);

  SugsFit fit;
  fit.z.assign(n, -1);
  fit.ordering.assign(ordering.begin(), ordering.end());
  fit.active_vars = active;
  fit.beta_posterior = BetaPosterior::prior(grid);

  std::vector<std::size_t> counts;
  fit.z[ordering[0]] = 0;
  fit.clusters.push_back(prior_state.added(x_act.row(ordering[0])));
  counts.push_back(1);
  // i = 1: pi_{1,1,l} = 1 for every l, so phi^(1) = kappa.

  for (std::size_t step = 1; step < n; ++step) {
    const std::size_t i = step + 1;  // 1-based position in the ordering
    const auto x = x_act.row(ordering[step]);
    try {
      std::vector<double> post = allocation_log_posterior(
          x, fit.clusters, prior_state, counts, grid, fit.beta_posterior, i);
      std::size_t best = 0;
      for (std::size_t k = 1; k < post.size(); ++k)
        if (post[k] > post[best]) best = k;  // ties keep the lowest index
      fit.beta_posterior =
          update_phi(fit.beta_posterior, best, counts, grid, i);
      if (best == fit.clusters.size()) {
        fit.clusters.push_back(prior_state.added(x));
        counts.push_back(1);
      } else {
        fit.clusters[best].add(x);
        ++counts[best];
      }
      fit.z[ordering[step]] = static_cast<int>(best);
    } catch (const numerical_error& e) {
      throw numerical_error("at ordering position " + std::to_string(i) +
                            " (observation " +
                            std::to_string(ordering[step]) + "): " + e.what());
    }
  }
  return fit;
}

}  // namespace sugs

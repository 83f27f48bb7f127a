#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sugs/common.hpp"
#include "sugs/conjugate.hpp"

namespace sugs {

// Discrete grid of permissible concentration-parameter values with prior
// weights kappa (normalised to sum to 1).
struct BetaGrid {
  std::vector<double> values;
  std::vector<double> kappa;

  BetaGrid(std::vector<double> values_, std::vector<double> kappa_);

  // 0.01, 0.1, 1, 5, 10, 15, 30, 50, 100 with kappa from an Exp(1) density
  // evaluated at each grid point, normalised.
  static BetaGrid defaults();
  static BetaGrid single(double beta);
  static BetaGrid with_exp_prior(std::vector<double> values);
  static BetaGrid with_uniform_prior(std::vector<double> values);

  std::size_t size() const { return values.size(); }
};

// Sequential posterior over the grid; log_phi normalised (logsumexp == 0).
struct BetaPosterior {
  std::vector<double> log_phi;

  static BetaPosterior prior(const BetaGrid& grid);
};

// Conditional prior over cluster assignments for observation i (1-based,
// i >= 2) given the sizes of the existing clusters: entry k < K is
// log(n_k / (beta + i - 1)), entry K is log(beta / (beta + i - 1)).
std::vector<double> crp_log_prior(std::span<const std::size_t> counts,
                                  double beta, std::size_t i);

// Grid-marginalised allocation posterior over the K existing clusters plus a
// new-cluster slot. Cluster states and x must cover the same (already
// masked) variable set; switched-off variables contribute identically to
// every entry and are omitted upstream.
std::vector<double> allocation_log_posterior(
    std::span<const double> x, const std::vector<ClusterState>& clusters,
    const ClusterState& new_cluster_state, std::span<const std::size_t> counts,
    const BetaGrid& grid, const BetaPosterior& phi, std::size_t i);

// Sequential grid-posterior update after assigning observation i to
// chosen_k; counts are the cluster sizes before the assignment.
BetaPosterior update_phi(const BetaPosterior& phi, std::size_t chosen_k,
                         std::span<const std::size_t> counts,
                         const BetaGrid& grid, std::size_t i);

// Closed form of the sequential phi recursion for a finished partition:
// log phi_l ~ log kappa_l + (K-1) log beta_l - sum_{i=2}^{n} log(beta_l+i-1).
// Equal to the phi produced by any pass that yields this partition.
BetaPosterior beta_posterior_for_partition(std::span<const int> z,
                                           const BetaGrid& grid);

struct SugsFit {
  std::vector<int> z;                 // compact labels 0..K-1
  std::vector<ClusterState> clusters;  // states over the active variables
  BetaPosterior beta_posterior;
  std::vector<int> ordering;
  std::vector<std::size_t> active_vars;

  std::size_t n_clusters() const { return clusters.size(); }
};

// One deterministic greedy pass over the data in the given ordering. The
// first processed observation opens cluster 0; each subsequent observation
// goes to the argmax of the allocation posterior, ties to the lowest cluster
// index. gamma masks the variables entering the likelihood (empty gamma
// means all variables on).
SugsFit sugs_pass(const Matrix& data, std::span<const int> ordering,
                  std::span<const std::uint8_t> gamma,
                  const Hyperparameters& hyper, const BetaGrid& grid);

}  // namespace sugs

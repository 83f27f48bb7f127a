#pragma once

#include <span>

#include "sugs/common.hpp"
#include "sugs/conjugate.hpp"
#include "sugs/model.hpp"
#include "sugs/sugs.hpp"

namespace sugs {

// Full-model log marginal likelihood: clustered term over switched-on
// variables plus the single-component term over switched-off variables, so
// models with different switch vectors are comparable on the same data.
// Invariant to cluster relabelling and observation order.
double log_marginal_likelihood_model(const Matrix& data,
                                     std::span<const int> z,
                                     const SwitchVector& gamma,
                                     const Hyperparameters& hyper);

// Log pseudo-marginal likelihood: sum over observations of the log of the
// allocation-weighted leave-one-out predictive density. exact_loo removes
// x_i from its cluster before evaluating (a cluster emptied by the removal
// falls back to the prior predictive with the new-cluster CRP mass);
// full_data_approx keeps all statistics, which is accurate for large n. The
// concentration parameter is handled by the grid posterior implied by the
// partition. OpenMP-parallel over observations.
double log_pseudo_marginal_likelihood(const Matrix& data,
                                      std::span<const int> z,
                                      const SwitchVector& gamma,
                                      const Hyperparameters& hyper,
                                      const BetaGrid& grid, PmlMode mode);

// Single-threaded reference implementation; kept for testing and benchmarks.
double log_pseudo_marginal_likelihood_serial(const Matrix& data,
                                             std::span<const int> z,
                                             const SwitchVector& gamma,
                                             const Hyperparameters& hyper,
                                             const BetaGrid& grid,
                                             PmlMode mode);

// Argmax under the criterion; ties broken by position in the set.
const FittedModel& select_best(std::span<const FittedModel> models,
                               Criterion criterion);

// Number of clusters of a compact partition; validates compactness.
std::size_t n_clusters(std::span<const int> z);

}  // namespace sugs

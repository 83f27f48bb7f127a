#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sugs/common.hpp"
#include "sugs/conjugate.hpp"
#include "sugs/model.hpp"
#include "sugs/scoring.hpp"
#include "sugs/sugs.hpp"

namespace sugs {

// Posterior log probabilities (log p(gamma_d = 1 | X, Z), log p(gamma_d = 0 |
// X, Z)), normalised as a pair. The on-term sums the per-cluster marginal
// likelihood of variable d over the clusters of z; the off-term is the
// single-component marginal likelihood of variable d over all observations.
std::pair<double, double> variable_log_posterior(const Matrix& data,
                                                 std::span<const int> z,
                                                 std::size_t d,
                                                 double prior_on,
                                                 const Hyperparameters& hyper);

// Sets every switch to the argmax of its indicator posterior; exact ties
// switch the variable on.
SwitchVector greedy_gamma_update(const Matrix& data, std::span<const int> z,
                                 double prior_on,
                                 const Hyperparameters& hyper);

struct VarSelFit {
  std::vector<int> z;
  SwitchVector gamma;
  int iterations_run = 0;
  double log_ml = 0.0;
  bool gamma_went_all_off = false;  // some iteration switched every variable off
};

// Alternates a greedy allocation pass (given the current switches) with a
// greedy switch update (given the resulting partition), max_iterations
// times; stops early once the switches reach a fixed point, which cannot
// change the result. Returns the final partition, switches and full-model
// log marginal likelihood.
VarSelFit sugsvarsel_pass(const Matrix& data, std::span<const int> ordering,
                          const SwitchVector& gamma0, int max_iterations,
                          const Hyperparameters& hyper, const BetaGrid& grid);

// round(p1_fraction * n_vars); throws invalid_input when the result is < 1.
std::size_t subsample_size(std::size_t n_vars, double p1_fraction);

// max(1, round(n_vars / 10)), mirroring the per-dataset choices the
// benchmarks use (20 subsamples for 200 variables).
std::size_t default_subsamples(std::size_t n_vars);

enum class Nu0Mode {
  n_variables,  // nu0 = number of columns of the matrix being fitted
  fixed,        // nu0 taken from the supplied hyperparameters as-is
};

struct SearchConfig {
  std::size_t subsamples = 0;  // M; 0 means default_subsamples(n_vars)
  std::size_t orderings_per_subsample = 10;
  std::size_t orderings = 10;  // Q
  double p1_fraction = 0.1;
  int max_iterations = 2;  // T
  double prior_on = 0.5;
  BetaGrid beta_grid = BetaGrid::defaults();
  std::uint64_t seed = 1;
  int threads = 0;  // 0: OpenMP default
  bool compute_pml = false;
  PmlMode pml_mode = PmlMode::exact_loo;
  Nu0Mode nu0_mode = Nu0Mode::n_variables;

  std::size_t effective_subsamples(std::size_t n_vars) const {
    return subsamples == 0 ? default_subsamples(n_vars) : subsamples;
  }
};

struct SubsampleInit {
  // One switch vector per subsample; a slot is empty only when every
  // ordering for that subsample failed numerically (recorded in failures).
  std::vector<std::optional<SwitchVector>> gammas;
  std::vector<SearchFailure> failures;
};

// Random sub-sampling initialisation: for each of M subsamples, fit the
// reduced data (all switches on) for several orderings, keep the best
// reduced model by ML, then extend its switches to all variables by scoring
// the remaining ones under the chosen partition on the full data.
SubsampleInit subsample_init(const Matrix& data, const Hyperparameters& hyper,
                             const SearchConfig& config);

// Q orderings per initial switch vector -> up to Q*M fitted models, each
// scored by the full-model ML (and optionally the PML). Tasks run on an
// OpenMP worker pool; results are gathered into per-task slots so the output
// is identical for any thread count.
ModelSet full_search(const Matrix& data, const Hyperparameters& hyper,
                     const SearchConfig& config);

// Single-threaded reference implementation; kept for testing and benchmarks.
ModelSet full_search_serial(const Matrix& data, const Hyperparameters& hyper,
                            const SearchConfig& config);

}  // namespace sugs

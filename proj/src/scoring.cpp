#include "sugs/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sugs {

std::size_t n_clusters(std::span<const int> z) {
  int hi = -1;
  for (int label : z) {
    if (label < 0) throw invalid_input("negative cluster label");
    hi = std::max(hi, label);
  }
  if (hi < 0) throw invalid_input("empty partition");
  std::vector<std::size_t> counts(static_cast<std::size_t>(hi) + 1, 0);
  for (int label : z) ++counts[label];
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] == 0)
      throw invalid_input("cluster " + std::to_string(k) + " is empty");
  return counts.size();
}

namespace {

struct ColumnStats {
  std::vector<std::size_t> counts;  // per cluster
  Matrix sum;                       // K x D
  Matrix sumsq;                     // K x D
};

ColumnStats accumulate_stats(const Matrix& data, std::span<const int> z,
                             std::size_t k_total) {
  ColumnStats s;
  s.counts.assign(k_total, 0);
  s.sum = Matrix(k_total, data.cols);
  s.sumsq = Matrix(k_total, data.cols);
  for (std::size_t r = 0; r < data.rows; ++r) {
    const std::size_t k = static_cast<std::size_t>(z[r]);
    ++s.counts[k];
    const double* row = data.values.data() + r * data.cols;
    double* sum_row = s.sum.values.data() + k * data.cols;
    double* ssq_row = s.sumsq.values.data() + k * data.cols;
    for (std::size_t d = 0; d < data.cols; ++d) {
      sum_row[d] += row[d];
      ssq_row[d] += row[d] * row[d];
    }
  }
  return s;
}

}  // namespace

double log_marginal_likelihood_model(const Matrix& data,
                                     std::span<const int> z,
                                     const SwitchVector& gamma,
                                     const Hyperparameters& hyper) {
  if (z.size() != data.rows) throw invalid_input("partition length mismatch");
  if (gamma.size() != data.cols) throw invalid_input("gamma length mismatch");
  if (hyper.n_vars() != data.cols)
    throw invalid_input("hyperparameter dimension mismatch");
  const std::size_t k_total = n_clusters(z);
  ColumnStats stats = accumulate_stats(data, z, k_total);

  double total = 0.0;
  for (std::size_t d = 0; d < data.cols; ++d) {
    if (gamma.gamma[d]) {
      for (std::size_t k = 0; k < k_total; ++k) {
        try {
          total += scalar_log_marginal(stats.counts[k], stats.sum(k, d),
                                       stats.sumsq(k, d), hyper.mu0[d],
                                       hyper.lambda0, hyper.nu0, hyper.s0);
        } catch (const numerical_error& e) {
          throw numerical_error("cluster " + std::to_string(k) +
                                ", variable " + std::to_string(d) + ": " +
                                e.what());
        }
      }
    } else {
      double sum = 0.0, sumsq = 0.0;
      for (std::size_t k = 0; k < k_total; ++k) {
        sum += stats.sum(k, d);
        sumsq += stats.sumsq(k, d);
      }
      try {
        total += scalar_log_marginal(data.rows, sum, sumsq, hyper.mu0[d],
                                     hyper.lambda0, hyper.nu0, hyper.s0);
      } catch (const numerical_error& e) {
        throw numerical_error("global component, variable " +
                              std::to_string(d) + ": " + e.what());
      }
    }
  }
  return total;
}

namespace {

struct PmlContext {
  Matrix x_on;   // active columns
  Matrix x_off;  // switched-off columns
  std::vector<ClusterState> cluster_states;  // over active variables
  ClusterState global_off;                   // all observations, off variables
  ClusterState prior_on;
  std::vector<std::size_t> counts;
  double log_weight_existing;  // add log(count) per cluster
  double log_weight_new;
};

PmlContext build_pml_context(const Matrix& data, std::span<const int> z,
                             const SwitchVector& gamma,
                             const Hyperparameters& hyper,
                             const BetaGrid& grid) {
  PmlContext ctx;
  const std::size_t k_total = n_clusters(z);
  std::vector<std::size_t> on;
  std::vector<std::size_t> off;
  for (std::size_t d = 0; d < gamma.size(); ++d)
    (gamma.gamma[d] ? on : off).push_back(d);
  ctx.x_on = data.select_columns(on);
  ctx.x_off = data.select_columns(off);
  const Hyperparameters hyper_on = hyper.restricted(on);
  const Hyperparameters hyper_off = hyper.restricted(off);

  ctx.prior_on = ClusterState::prior(hyper_on);
  ctx.cluster_states.assign(k_total, ctx.prior_on);
  ctx.global_off = ClusterState::prior(hyper_off);
  ctx.counts.assign(k_total, 0);
  for (std::size_t r = 0; r < data.rows; ++r) {
    ctx.cluster_states[z[r]].add(ctx.x_on.row(r));
    ctx.global_off.add(ctx.x_off.row(r));
    ++ctx.counts[z[r]];
  }

  // Allocation weights marginalised over the grid, with the grid posterior
  // implied by the partition; the denominator beta + n - 1 is shared.
  BetaPosterior phi = beta_posterior_for_partition(z, grid);
  std::vector<double> a(grid.size()), b(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) {
    double log_denom =
        std::log(grid.values[l] + static_cast<double>(data.rows - 1));
    a[l] = phi.log_phi[l] - log_denom;
    b[l] = a[l] + std::log(grid.values[l]);
  }
  ctx.log_weight_existing = log_sum_exp(a);
  ctx.log_weight_new = log_sum_exp(b);
  return ctx;
}

double pml_term(const PmlContext& ctx, std::span<const int> z, std::size_t r,
                PmlMode mode) {
  const std::size_t k_total = ctx.cluster_states.size();
  const std::size_t own = static_cast<std::size_t>(z[r]);
  const auto x_on = ctx.x_on.row(r);
  const auto x_off = ctx.x_off.row(r);

  std::vector<double> log_terms(k_total);
  std::vector<double> log_w(k_total);
  double off_term;
  if (mode == PmlMode::exact_loo) {
    for (std::size_t k = 0; k < k_total; ++k) {
      std::size_t held_out_count = ctx.counts[k] - (k == own ? 1 : 0);
      if (held_out_count == 0) {
        // own singleton cluster: new-cluster mass, prior predictive
        log_w[k] = ctx.log_weight_new;
        log_terms[k] = ctx.prior_on.predictive_log_density(x_on);
      } else {
        log_w[k] = std::log(static_cast<double>(held_out_count)) +
                   ctx.log_weight_existing;
        log_terms[k] =
            (k == own)
                ? ctx.cluster_states[k].removed(x_on).predictive_log_density(
                      x_on)
                : ctx.cluster_states[k].predictive_log_density(x_on);
      }
    }
    off_term =
        ctx.global_off.removed(x_off).predictive_log_density(x_off);
  } else {
    for (std::size_t k = 0; k < k_total; ++k) {
      log_w[k] = std::log(static_cast<double>(ctx.counts[k])) +
                 ctx.log_weight_existing;
      log_terms[k] = ctx.cluster_states[k].predictive_log_density(x_on);
    }
    off_term = ctx.global_off.predictive_log_density(x_off);
  }
  double norm = log_sum_exp(log_w);
  for (std::size_t k = 0; k < k_total; ++k) log_terms[k] += log_w[k] - norm;
  return log_sum_exp(log_terms) + off_term;
}

double pml_impl(const Matrix& data, std::span<const int> z,
                const SwitchVector& gamma, const Hyperparameters& hyper,
                const BetaGrid& grid, PmlMode mode, bool parallel) {
  if (z.size() != data.rows) throw invalid_input("partition length mismatch");
  if (gamma.size() != data.cols) throw invalid_input("gamma length mismatch");
  PmlContext ctx = build_pml_context(data, z, gamma, hyper, grid);

  // Per-observation terms land in their own slot and are reduced in index
  // order, so the result does not depend on the thread count.
  std::vector<double> terms(data.rows);
  if (parallel) {
    std::vector<std::string> errors(data.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(data.rows);
         ++r) {
      try {
        terms[r] = pml_term(ctx, z, static_cast<std::size_t>(r), mode);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
    for (std::size_t r = 0; r < data.rows; ++r)
      if (!errors[r].empty())
        throw numerical_error("observation " + std::to_string(r) + ": " +
                              errors[r]);
  } else {
    for (std::size_t r = 0; r < data.rows; ++r)
      terms[r] = pml_term(ctx, z, r, mode);
  }
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

}  // namespace

double log_pseudo_marginal_likelihood(const Matrix& data,
                                      std::span<const int> z,
                                      const SwitchVector& gamma,
                                      const Hyperparameters& hyper,
                                      const BetaGrid& grid, PmlMode mode) {
  return pml_impl(data, z, gamma, hyper, grid, mode, true);
}

double log_pseudo_marginal_likelihood_serial(const Matrix& data,
                                             std::span<const int> z,
                                             const SwitchVector& gamma,
                                             const Hyperparameters& hyper,
                                             const BetaGrid& grid,
                                             PmlMode mode) {
  return pml_impl(data, z, gamma, hyper, grid, mode, false);
}

const FittedModel& select_best(std::span<const FittedModel> models,
                               Criterion criterion) {
  if (models.empty()) throw invalid_input("no models to select from");
  const FittedModel* best = nullptr;
  for (const FittedModel& m : models) {
    double score;
    if (criterion == Criterion::ml) {
      score = m.log_ml;
    } else {
      if (!m.log_pml)
        throw invalid_input("model lacks a PML score; rerun with PML enabled");
      score = *m.log_pml;
    }
    if (best == nullptr) {
      best = &m;
      continue;
    }
    double best_score = criterion == Criterion::ml
                            ? best->log_ml
                            : *best->log_pml;
    if (score > best_score) best = &m;  // ties keep the earlier model
  }
  return *best;
}

}  // namespace sugs

#include "sugs/varsel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sugs {

namespace {

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

struct ClusterColumnStats {
  std::vector<std::size_t> counts;
  Matrix sum;    // K x D
  Matrix sumsq;  // K x D
};

ClusterColumnStats cluster_column_stats(const Matrix& data,
                                        std::span<const int> z,
                                        std::size_t k_total) {
  ClusterColumnStats s;
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

std::pair<double, double> indicator_pair(const ClusterColumnStats& stats,
                                         std::size_t d, std::size_t n,
                                         double prior_on,
                                         const Hyperparameters& hyper) {
  double on = std::log(prior_on);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t k = 0; k < stats.counts.size(); ++k) {
    on += scalar_log_marginal(stats.counts[k], stats.sum(k, d),
                              stats.sumsq(k, d), hyper.mu0[d], hyper.lambda0,
                              hyper.nu0, hyper.s0);
    sum += stats.sum(k, d);
    sumsq += stats.sumsq(k, d);
  }
  double off = std::log1p(-prior_on) +
               scalar_log_marginal(n, sum, sumsq, hyper.mu0[d], hyper.lambda0,
                                   hyper.nu0, hyper.s0);
  double norm = log_sum_exp(std::array{on, off});
  return {on - norm, off - norm};
}

}  // namespace

std::pair<double, double> variable_log_posterior(const Matrix& data,
                                                 std::span<const int> z,
                                                 std::size_t d,
                                                 double prior_on,
                                                 const Hyperparameters& hyper) {
  if (!(prior_on > 0.0 && prior_on < 1.0))
    throw invalid_input("prior_on must lie in (0, 1)");
  if (d >= data.cols) throw invalid_input("variable index out of range");
  const std::size_t k_total = n_clusters(z);  // throws on empty clusters

  // column-d statistics only
  ClusterColumnStats stats;
  stats.counts.assign(k_total, 0);
  stats.sum = Matrix(k_total, 1);
  stats.sumsq = Matrix(k_total, 1);
  for (std::size_t r = 0; r < data.rows; ++r) {
    const std::size_t k = static_cast<std::size_t>(z[r]);
    double x = data(r, d);
    ++stats.counts[k];
    stats.sum(k, 0) += x;
    stats.sumsq(k, 0) += x * x;
  }
  Hyperparameters hyper_d;
  hyper_d.mu0 = {hyper.mu0[d]};
  hyper_d.lambda0 = hyper.lambda0;
  hyper_d.nu0 = hyper.nu0;
  hyper_d.s0 = hyper.s0;
  return indicator_pair(stats, 0, data.rows, prior_on, hyper_d);
}

SwitchVector greedy_gamma_update(const Matrix& data, std::span<const int> z,
                                 double prior_on,
                                 const Hyperparameters& hyper) {
  if (!(prior_on > 0.0 && prior_on < 1.0))
    throw invalid_input("prior_on must lie in (0, 1)");
  const std::size_t k_total = n_clusters(z);
  ClusterColumnStats stats = cluster_column_stats(data, z, k_total);
  SwitchVector out;
  out.prior_on = prior_on;
  out.gamma.resize(data.cols);
  for (std::size_t d = 0; d < data.cols; ++d) {
    auto [on, off] = indicator_pair(stats, d, data.rows, prior_on, hyper);
    out.gamma[d] = on >= off ? 1 : 0;
  }
  return out;
}

VarSelFit sugsvarsel_pass(const Matrix& data, std::span<const int> ordering,
                          const SwitchVector& gamma0, int max_iterations,
                          const Hyperparameters& hyper, const BetaGrid& grid) {
  if (max_iterations < 1) throw invalid_input("need at least one iteration");
  if (gamma0.size() != data.cols)
    throw invalid_input("initial switch vector dimension mismatch");

  VarSelFit result;
  SwitchVector gamma = gamma0;
  SugsFit fit;
  for (int t = 1; t <= max_iterations; ++t) {
    fit = sugs_pass(data, ordering, gamma.gamma, hyper, grid);
    SwitchVector next = greedy_gamma_update(data, fit.z, gamma0.prior_on, hyper);
    result.iterations_run = t;
    if (next.gamma == gamma.gamma) {
      gamma = std::move(next);
      break;  // fixed point: another iteration cannot change (z, gamma)
    }
    gamma = std::move(next);
    if (gamma.all_off()) result.gamma_went_all_off = true;
  }
  result.z = std::move(fit.z);
  result.gamma = std::move(gamma);
  result.log_ml =
      log_marginal_likelihood_model(data, result.z, result.gamma, hyper);
  return result;
}

std::size_t subsample_size(std::size_t n_vars, double p1_fraction) {
  if (!(p1_fraction > 0.0 && p1_fraction <= 1.0))
    throw invalid_input("p1_fraction must lie in (0, 1]");
  auto p1 = static_cast<std::size_t>(
      std::llround(p1_fraction * static_cast<double>(n_vars)));
  if (p1 < 1)
    throw invalid_input("subsample fraction selects no variables (p1 < 1)");
  return std::min(p1, n_vars);
}

std::size_t default_subsamples(std::size_t n_vars) {
  auto m = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_vars) / 10.0));
  return std::max<std::size_t>(m, 1);
}

namespace {

Hyperparameters reduced_hyper(const Hyperparameters& hyper,
                              std::span<const std::size_t> vars,
                              Nu0Mode mode) {
  Hyperparameters h = hyper.restricted(vars);
  if (mode == Nu0Mode::n_variables) h.nu0 = static_cast<double>(vars.size());
  return h;
}

SubsampleInit subsample_init_impl(const Matrix& data,
                                  const Hyperparameters& hyper,
                                  const SearchConfig& config, bool parallel) {
  const std::size_t m_total = config.effective_subsamples(data.cols);
  const std::size_t p1 = subsample_size(data.cols, config.p1_fraction);
  if (config.orderings_per_subsample < 1)
    throw invalid_input("need at least one ordering per subsample");

  SubsampleInit init;
  init.gammas.resize(m_total);
  std::vector<std::vector<SearchFailure>> failures(m_total);

  auto run_one = [&](std::size_t j) {
    Rng var_rng(derive_seed(config.seed, 1, j));
    std::vector<std::size_t> vars =
        sample_without_replacement(data.cols, p1, var_rng);
    const Matrix reduced = data.select_columns(vars);
    const Hyperparameters hyper_red =
        reduced_hyper(hyper, vars, config.nu0_mode);

    std::optional<VarSelFit> best;
    for (std::size_t q = 0; q < config.orderings_per_subsample; ++q) {
      Rng ord_rng(derive_seed(config.seed, 2, j, q));
      std::vector<int> ordering = random_permutation(data.rows, ord_rng);
      try {
        VarSelFit fit = sugsvarsel_pass(
            reduced, ordering, SwitchVector::all_on(p1, config.prior_on),
            config.max_iterations, hyper_red, config.beta_grid);
        if (!best || fit.log_ml > best->log_ml) best = std::move(fit);
      } catch (const numerical_error& e) {
        failures[j].push_back(
            {j, static_cast<std::ptrdiff_t>(q),
             std::string("init pass failed: ") + e.what()});
      }
    }
    if (!best) return;  // every ordering failed; recorded above

    // extend the reduced switches to all variables under the chosen partition
    SwitchVector full;
    full.prior_on = config.prior_on;
    full.gamma.assign(data.cols, 0);
    std::vector<std::uint8_t> in_subsample(data.cols, 0);
    for (std::size_t t = 0; t < vars.size(); ++t) {
      full.gamma[vars[t]] = best->gamma.gamma[t];
      in_subsample[vars[t]] = 1;
    }
    try {
      for (std::size_t d = 0; d < data.cols; ++d) {
        if (in_subsample[d]) continue;
        auto [on, off] = variable_log_posterior(data, best->z, d,
                                                config.prior_on, hyper);
        full.gamma[d] = on >= off ? 1 : 0;
      }
      init.gammas[j] = std::move(full);
    } catch (const numerical_error& e) {
      failures[j].push_back(
          {j, -1, std::string("switch extension failed: ") + e.what()});
    }
  };

  if (parallel) {
    const int threads = resolve_threads(config.threads);
    std::vector<std::string> errors(m_total);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(m_total); ++j) {
      try {
        run_one(static_cast<std::size_t>(j));
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
    for (std::size_t j = 0; j < m_total; ++j)
      if (!errors[j].empty()) throw invalid_input(errors[j]);
  } else {
    for (std::size_t j = 0; j < m_total; ++j) run_one(j);
  }

  for (auto& f : failures)
    init.failures.insert(init.failures.end(), f.begin(), f.end());
  return init;
}

ModelSet full_search_impl(const Matrix& data, const Hyperparameters& hyper,
                          const SearchConfig& config, bool parallel) {
  if (config.orderings < 1) throw invalid_input("need at least one ordering");
  hyper.validate();
  if (hyper.n_vars() != data.cols)
    throw invalid_input("hyperparameter dimension mismatch");

  SubsampleInit init = subsample_init_impl(data, hyper, config, parallel);
  const std::size_t m_total = init.gammas.size();

  struct Task {
    std::size_t subsample;
    std::size_t ordering;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < m_total; ++i) {
    if (!init.gammas[i]) continue;
    for (std::size_t q = 0; q < config.orderings; ++q) tasks.push_back({i, q});
  }

  std::vector<std::optional<FittedModel>> slots(tasks.size());
  std::vector<std::string> errors(tasks.size());

  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    Rng ord_rng(derive_seed(config.seed, 3, task.subsample, task.ordering));
    std::vector<int> ordering = random_permutation(data.rows, ord_rng);
    try {
      VarSelFit fit =
          sugsvarsel_pass(data, ordering, *init.gammas[task.subsample],
                          config.max_iterations, hyper, config.beta_grid);
      FittedModel model;
      model.z = std::move(fit.z);
      model.gamma = std::move(fit.gamma);
      model.log_ml = fit.log_ml;
      if (config.compute_pml) {
        model.log_pml = log_pseudo_marginal_likelihood_serial(
            data, model.z, model.gamma, hyper, config.beta_grid,
            config.pml_mode);
      }
      model.provenance = {task.subsample, task.ordering, config.seed};
      slots[t] = std::move(model);
    } catch (const numerical_error& e) {
      errors[t] = e.what();
    }
  };

  if (parallel) {
    const int threads = resolve_threads(config.threads);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tasks.size());
         ++t) {
      run_task(static_cast<std::size_t>(t));
    }
  } else {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  }

  // deterministic gather in task order
  ModelSet out;
  out.failures = std::move(init.failures);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (slots[t]) {
      out.models.push_back(std::move(*slots[t]));
    } else {
      out.failures.push_back({tasks[t].subsample,
                              static_cast<std::ptrdiff_t>(tasks[t].ordering),
                              errors[t]});
    }
  }
  return out;
}

}  // namespace

SubsampleInit subsample_init(const Matrix& data, const Hyperparameters& hyper,
                             const SearchConfig& config) {
  return subsample_init_impl(data, hyper, config, true);
}

ModelSet full_search(const Matrix& data, const Hyperparameters& hyper,
                     const SearchConfig& config) {
  return full_search_impl(data, hyper, config, true);
}

ModelSet full_search_serial(const Matrix& data, const Hyperparameters& hyper,
                            const SearchConfig& config) {
  return full_search_impl(data, hyper, config, false);
}

}  // namespace sugs

// Wall-clock comparison of the OpenMP kernels against their serial reference
// implementations (full search, pseudo-marginal likelihood, co-clustering
// average), with an equality check on the outputs.

#include <chrono>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sugs/bma.hpp"
#include "sugs/eval.hpp"
#include "sugs/scoring.hpp"
#include "sugs/varsel.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool same_models(const sugs::ModelSet& a, const sugs::ModelSet& b) {
  if (a.models.size() != b.models.size()) return false;
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    if (a.models[i].z != b.models[i].z) return false;
    if (a.models[i].gamma.gamma != b.models[i].gamma.gamma) return false;
    if (std::memcmp(&a.models[i].log_ml, &b.models[i].log_ml,
                    sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  std::size_t n = 100, d_total = 200, d_relevant = 100;
  std::size_t subsamples = 10;
  std::size_t orderings = 10;
  int threads = 0;
  std::uint64_t seed = 7;
  app.add_option("--n", n, "observations");
  app.add_option("--d-total", d_total, "variables");
  app.add_option("--d-relevant", d_relevant, "relevant variables");
  app.add_option("--subsamples", subsamples, "initialisation subsamples (M)");
  app.add_option("--orderings", orderings, "orderings per subsample (Q)");
  app.add_option("--threads", threads, "threads for the parallel runs");
  app.add_option("--seed", seed, "seed");
  CLI11_PARSE(app, argc, argv);

  sugs::ScenarioSpec spec = sugs::ScenarioSpec::high_dim(d_relevant, seed);
  spec.n = n;
  spec.d_total = d_total;
  sugs::LabeledDataset dataset = sugs::simulate(spec);
  sugs::Hyperparameters hyper =
      sugs::Hyperparameters::data_defaults(dataset.data);

  sugs::SearchConfig config;
  config.subsamples = subsamples;
  config.orderings = orderings;
  config.seed = seed;
  config.threads = threads;

  std::cout << std::fixed << std::setprecision(3);

  auto t0 = std::chrono::steady_clock::now();
  sugs::ModelSet serial =
      sugs::full_search_serial(dataset.data, hyper, config);
  double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  sugs::ModelSet parallel = sugs::full_search(dataset.data, hyper, config);
  double t_parallel = seconds_since(t0);

  std::cout << "full_search      serial " << t_serial << "s   openmp "
            << t_parallel << "s   speedup " << t_serial / t_parallel
            << "x   outputs "
            << (same_models(serial, parallel) ? "identical" : "DIFFER")
            << "\n";

  const sugs::FittedModel& best =
      sugs::select_best(serial.models, sugs::Criterion::ml);
  const sugs::BetaGrid grid = sugs::BetaGrid::defaults();

  t0 = std::chrono::steady_clock::now();
  double pml_serial = sugs::log_pseudo_marginal_likelihood_serial(
      dataset.data, best.z, best.gamma, hyper, grid,
      sugs::PmlMode::exact_loo);
  double t_pml_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  double pml_parallel = sugs::log_pseudo_marginal_likelihood(
      dataset.data, best.z, best.gamma, hyper, grid,
      sugs::PmlMode::exact_loo);
  double t_pml_parallel = seconds_since(t0);

  std::cout << "pml (exact loo)  serial " << t_pml_serial << "s   openmp "
            << t_pml_parallel << "s   speedup "
            << t_pml_serial / t_pml_parallel << "x   outputs "
            << (pml_serial == pml_parallel ? "identical" : "DIFFER") << "\n";

  sugs::ModelWeights weights = sugs::model_weights(serial.models, 1e12);
  t0 = std::chrono::steady_clock::now();
  sugs::CoClusterMatrix s_serial =
      sugs::bma_coclustering_serial(serial.models, weights);
  double t_bma_serial = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  sugs::CoClusterMatrix s_parallel =
      sugs::bma_coclustering(serial.models, weights);
  double t_bma_parallel = seconds_since(t0);

  std::cout << "bma_coclustering serial " << t_bma_serial << "s   openmp "
            << t_bma_parallel << "s   speedup "
            << t_bma_serial / t_bma_parallel << "x   outputs "
            << (s_serial.s == s_parallel.s ? "identical" : "DIFFER") << "\n";
  return 0;
}

// Command-line front end: simulate synthetic benchmark datasets, cluster a
// CSV with the greedy variable-selection search plus model averaging, and
// evaluate run artifacts against a known truth.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sugs/bma.hpp"
#include "sugs/eval.hpp"
#include "sugs/io.hpp"
#include "sugs/scoring.hpp"
#include "sugs/varsel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitAllFailed = 3;

std::vector<double> parse_double_list(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, sep)) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw sugs::invalid_input("cannot parse '" + cell + "' as a number");
    }
  }
  if (out.empty()) throw sugs::invalid_input("empty numeric list");
  return out;
}

// All knobs of the cluster subcommand; mirrors the --config JSON 1:1.
struct RunConfig {
  std::string input;
  std::string output = "sugs-run";
  bool standardize = false;
  std::string mu0 = "mean";  // "mean" or a number applied to every variable
  double lambda0 = 0.01;
  std::string nu0 = "vars";  // "vars" or a number
  double s0 = 0.2;
  std::vector<double> beta_grid = {0.01, 0.1, 1, 5, 10, 15, 30, 50, 100};
  std::string kappa_mode = "exp1";  // exp1 | uniform | explicit
  std::vector<double> kappa;        // used when kappa_mode == explicit
  double prior_on = 0.5;
  int iterations = 2;
  std::size_t subsamples = 0;  // 0: round(D / 10)
  std::size_t orderings = 10;
  std::size_t orderings_per_subsample = 10;
  double p1_fraction = 0.1;
  std::string criterion = "ml";        // ml | pml
  std::string pml_mode = "exact-loo";  // exact-loo | full-data-approx
  double window_k = 20.0;
  double cut_height = 0.5;
  std::uint64_t seed = 1;
  int threads = 0;
};

json config_to_json(const RunConfig& c) {
  json j;
  j["input"] = c.input;
  j["output"] = c.output;
  j["standardize"] = c.standardize;
  j["mu0"] = c.mu0;
  j["lambda0"] = c.lambda0;
  j["nu0"] = c.nu0;
  j["s0"] = c.s0;
  j["beta_grid"] = c.beta_grid;
  j["kappa_mode"] = c.kappa_mode;
  j["kappa"] = c.kappa;
  j["prior_on"] = c.prior_on;
  j["iterations"] = c.iterations;
  j["subsamples"] = c.subsamples;
  j["orderings"] = c.orderings;
  j["orderings_per_subsample"] = c.orderings_per_subsample;
  j["p1_fraction"] = c.p1_fraction;
  j["criterion"] = c.criterion;
  j["pml_mode"] = c.pml_mode;
  j["window_k"] = c.window_k;
  j["cut_height"] = c.cut_height;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

void config_from_json(const json& j, RunConfig& c) {
  c.input = j.value("input", c.input);
  c.output = j.value("output", c.output);
  c.standardize = j.value("standardize", c.standardize);
  if (j.contains("mu0"))
    c.mu0 = j["mu0"].is_string() ? j["mu0"].get<std::string>()
                                 : std::to_string(j["mu0"].get<double>());
  c.lambda0 = j.value("lambda0", c.lambda0);
  if (j.contains("nu0"))
    c.nu0 = j["nu0"].is_string() ? j["nu0"].get<std::string>()
                                 : std::to_string(j["nu0"].get<double>());
  c.s0 = j.value("s0", c.s0);
  if (j.contains("beta_grid"))
    c.beta_grid = j["beta_grid"].get<std::vector<double>>();
  c.kappa_mode = j.value("kappa_mode", c.kappa_mode);
  if (j.contains("kappa")) c.kappa = j["kappa"].get<std::vector<double>>();
  c.prior_on = j.value("prior_on", c.prior_on);
  c.iterations = j.value("iterations", c.iterations);
  c.subsamples = j.value("subsamples", c.subsamples);
  c.orderings = j.value("orderings", c.orderings);
  c.orderings_per_subsample =
      j.value("orderings_per_subsample", c.orderings_per_subsample);
  c.p1_fraction = j.value("p1_fraction", c.p1_fraction);
  c.criterion = j.value("criterion", c.criterion);
  c.pml_mode = j.value("pml_mode", c.pml_mode);
  c.window_k = j.value("window_k", c.window_k);
  c.cut_height = j.value("cut_height", c.cut_height);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
}

sugs::BetaGrid make_grid(const RunConfig& c) {
  if (c.kappa_mode == "exp1") return sugs::BetaGrid::with_exp_prior(c.beta_grid);
  if (c.kappa_mode == "uniform")
    return sugs::BetaGrid::with_uniform_prior(c.beta_grid);
  if (c.kappa_mode == "explicit") return sugs::BetaGrid(c.beta_grid, c.kappa);
  throw sugs::invalid_input("unknown kappa mode '" + c.kappa_mode + "'");
}

sugs::Hyperparameters make_hyper(const RunConfig& c, const sugs::Matrix& data) {
  std::vector<double> mu0;
  if (c.mu0 == "mean") {
    mu0 = data.column_means();
  } else {
    mu0.assign(data.cols, std::stod(c.mu0));
  }
  double nu0 = c.nu0 == "vars" ? static_cast<double>(data.cols)
                               : std::stod(c.nu0);
  return sugs::Hyperparameters(std::move(mu0), c.lambda0, nu0, c.s0);
}

sugs::SearchConfig make_search_config(const RunConfig& c,
                                      const sugs::Matrix& data) {
  sugs::SearchConfig sc;
  sc.subsamples = c.subsamples == 0 ? sugs::default_subsamples(data.cols)
                                    : c.subsamples;
  sc.orderings = c.orderings;
  sc.orderings_per_subsample = c.orderings_per_subsample;
  sc.p1_fraction = c.p1_fraction;
  sc.max_iterations = c.iterations;
  sc.prior_on = c.prior_on;
  sc.beta_grid = make_grid(c);
  sc.seed = c.seed;
  sc.threads = c.threads;
  sc.compute_pml = c.criterion == "pml";
  if (c.pml_mode == "exact-loo")
    sc.pml_mode = sugs::PmlMode::exact_loo;
  else if (c.pml_mode == "full-data-approx")
    sc.pml_mode = sugs::PmlMode::full_data_approx;
  else
    throw sugs::invalid_input("unknown pml mode '" + c.pml_mode + "'");
  sc.nu0_mode = c.nu0 == "vars" ? sugs::Nu0Mode::n_variables
                                : sugs::Nu0Mode::fixed;
  return sc;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << v;
  return ss.str();
}

int cmd_cluster(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  sugs::Table table = sugs::read_csv(config.input);
  if (config.standardize) sugs::standardize_columns(table.data);

  const sugs::Hyperparameters hyper = make_hyper(config, table.data);
  const sugs::SearchConfig search = make_search_config(config, table.data);
  const std::string config_hash =
      hex64(sugs::fnv1a_hash(config_to_json(config).dump()));
  const std::string comment =
      "seed=" + std::to_string(config.seed) + " config_hash=" + config_hash;

  sugs::ModelSet models = sugs::full_search(table.data, hyper, search);
  if (models.models.empty()) {
    std::cerr << "every model failed numerically:\n";
    for (const auto& f : models.failures)
      std::cerr << "  subsample " << f.subsample << ", ordering " << f.ordering
                << ": " << f.message << "\n";
    return kExitAllFailed;
  }

  const sugs::Criterion criterion = config.criterion == "pml"
                                        ? sugs::Criterion::pml
                                        : sugs::Criterion::ml;
  const sugs::FittedModel& best = sugs::select_best(models.models, criterion);
  sugs::ModelWeights weights =
      sugs::model_weights(models.models, config.window_k);
  sugs::CoClusterMatrix bmac = sugs::bma_coclustering(models.models, weights);
  std::vector<double> f_bma = sugs::bma_variable_scores(models.models, weights);
  std::vector<int> summary = sugs::summarize(bmac, config.cut_height);

  fs::create_directories(config.output);
  const fs::path out(config.output);
  sugs::write_models_json(out / "models.json", models, config.seed,
                          config_hash);
  sugs::write_assignments_csv(out / "assignments.csv", table.ids, summary,
                              comment);
  sugs::write_coclustering_csv(out / "coclustering.csv", bmac, table.ids,
                               comment);
  sugs::write_variable_scores_csv(out / "variable_scores.csv", table.columns,
                                  best.gamma.gamma, f_bma, comment);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json meta;
  meta["config"] = config_to_json(config);
  meta["config_hash"] = config_hash;
  meta["seed"] = config.seed;
  meta["versions"] = {{"sugsvarsel", std::string(sugs::version)},
                      {"compiler", __VERSION__}};
  meta["wall_clock_seconds"] = wall;
  meta["n_observations"] = table.data.rows;
  meta["n_variables"] = table.data.cols;
  meta["n_models"] = models.models.size();
  meta["n_failures"] = models.failures.size();
  meta["n_clusters_bma"] = sugs::n_clusters(summary);
  meta["n_clusters_best"] = sugs::n_clusters(best.z);
  meta["models_in_window"] = weights.window.size();
  std::ofstream meta_out(out / "run_meta.json");
  meta_out << meta.dump(2) << "\n";

  std::cout << "models: " << models.models.size() << " (" << weights.window.size()
            << " in window), clusters: " << sugs::n_clusters(summary)
            << ", wall: " << wall << "s\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string output = "sugs-data";
  std::size_t n = 100;
  std::size_t d_total = 200;
  std::size_t d_relevant = 100;
  std::string weights = "0.5,0.3,0.2";
  std::string means = "0;2;-2";
  std::vector<std::string> cov2;  // "component:a,b,c,d"
  std::uint64_t seed = 1;
};

sugs::ScenarioSpec make_spec(const SimulateArgs& a) {
  sugs::ScenarioSpec spec;
  spec.n = a.n;
  spec.d_total = a.d_total;
  spec.d_relevant = a.d_relevant;
  spec.weights = parse_double_list(a.weights, ',');
  std::stringstream ss(a.means);
  std::string comp;
  while (std::getline(ss, comp, ';')) {
    std::vector<double> m = parse_double_list(comp, ',');
    if (m.size() == 1) m.assign(a.d_relevant, m[0]);
    spec.means.push_back(std::move(m));
  }
  if (!a.cov2.empty()) {
    spec.cov2.assign(spec.weights.size(), std::nullopt);
    for (const std::string& entry : a.cov2) {
      auto colon = entry.find(':');
      if (colon == std::string::npos)
        throw sugs::invalid_input("--cov2 expects component:a,b,c,d");
      std::size_t comp_idx = std::stoul(entry.substr(0, colon));
      std::vector<double> v = parse_double_list(entry.substr(colon + 1), ',');
      if (comp_idx >= spec.cov2.size() || v.size() != 4)
        throw sugs::invalid_input("--cov2 expects component:a,b,c,d");
      spec.cov2[comp_idx] = std::array<double, 4>{v[0], v[1], v[2], v[3]};
    }
  }
  spec.seed = a.seed;
  return spec;
}

int cmd_simulate(const SimulateArgs& args) {
  sugs::ScenarioSpec spec = make_spec(args);
  sugs::LabeledDataset dataset = sugs::simulate(spec);
  fs::create_directories(args.output);
  const fs::path out(args.output);

  sugs::Table table;
  table.data = dataset.data;
  for (std::size_t d = 0; d < spec.d_total; ++d)
    table.columns.push_back("v" + std::to_string(d + 1));
  for (std::size_t r = 0; r < spec.n; ++r)
    table.ids.push_back(std::to_string(r + 1));
  sugs::write_csv(out / "data.csv", table,
                  "seed=" + std::to_string(spec.seed));
  sugs::write_truth_json(out / "truth.json", dataset, spec);
  std::cout << "wrote " << (out / "data.csv").string() << " ("
            << spec.n << " x " << spec.d_total << ")\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string run;
  std::string truth;
  std::string output;  // empty: stdout
  std::string criterion = "ml";
};

int cmd_evaluate(const EvaluateArgs& args) {
  const fs::path run(args.run);
  sugs::ModelSet models = sugs::read_models_json(run / "models.json");
  std::vector<int> bma_z = sugs::read_assignments_csv(run / "assignments.csv");
  sugs::Truth truth = sugs::read_truth_json(args.truth);
  if (models.models.empty())
    throw sugs::invalid_input("run contains no models");

  const sugs::Criterion criterion = args.criterion == "pml"
                                        ? sugs::Criterion::pml
                                        : sugs::Criterion::ml;
  const sugs::FittedModel& best = sugs::select_best(models.models, criterion);
  auto [rel, irr] = sugs::variable_recovery(best.gamma.gamma, truth.gamma);

  json metrics;
  metrics["ari_best"] = sugs::adjusted_rand_index(best.z, truth.z);
  metrics["ari_bma"] = sugs::adjusted_rand_index(bma_z, truth.z);
  metrics["correct_relevant"] = rel;
  metrics["correct_irrelevant"] = irr;
  metrics["n_clusters_best"] = sugs::n_clusters(best.z);
  metrics["n_clusters_bma"] = sugs::n_clusters(bma_z);
  metrics["n_models"] = models.models.size();
  metrics["n_failures"] = models.failures.size();
  metrics["criterion"] = args.criterion;
  metrics["best_log_ml"] = best.log_ml;
  if (best.log_pml) metrics["best_log_pml"] = *best.log_pml;

  if (args.output.empty()) {
    std::cout << metrics.dump(2) << "\n";
  } else {
    std::ofstream out(args.output);
    if (!out) throw sugs::invalid_input("cannot write " + args.output);
    out << metrics.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy Dirichlet-process clustering with variable selection "
               "and model averaging"};
  app.require_subcommand(1);

  RunConfig run;
  std::string config_path;
  CLI::App* cluster = app.add_subcommand("cluster", "cluster a CSV dataset");
  cluster->add_option("--input", run.input, "numeric CSV with header row")
      ->required();
  cluster->add_option("--output", run.output, "output directory");
  cluster->add_flag("--standardize", run.standardize,
                    "centre/scale each column (n-1 variance)");
  cluster->add_option("--mu0", run.mu0, "'mean' or a number");
  cluster->add_option("--lambda0", run.lambda0, "prior precision scale");
  cluster->add_option("--nu0", run.nu0, "'vars' or a number");
  cluster->add_option("--s0", run.s0, "prior scale");
  cluster->add_option(
      "--beta-grid",
      [&run](const std::vector<std::string>& v) {
        run.beta_grid = parse_double_list(v.back(), ',');
        return true;
      },
      "comma-separated concentration grid");
  cluster->add_option("--kappa-mode", run.kappa_mode,
                      "exp1 | uniform | explicit");
  cluster->add_option(
      "--kappa",
      [&run](const std::vector<std::string>& v) {
        run.kappa = parse_double_list(v.back(), ',');
        return true;
      },
      "explicit grid prior weights");
  cluster->add_option("--prior-on", run.prior_on,
                      "prior probability a variable is relevant");
  cluster->add_option("--iterations", run.iterations,
                      "variable-selection iterations (T)");
  cluster->add_option("--subsamples", run.subsamples,
                      "initialisation subsamples (M); 0 = round(D/10)");
  cluster->add_option("--orderings", run.orderings,
                      "orderings per initial switch vector (Q)");
  cluster->add_option("--orderings-per-subsample",
                      run.orderings_per_subsample,
                      "orderings per initialisation subsample");
  cluster->add_option("--p1-fraction", run.p1_fraction,
                      "fraction of variables per subsample");
  cluster->add_option("--criterion", run.criterion, "ml | pml");
  cluster->add_option("--pml-mode", run.pml_mode,
                      "exact-loo | full-data-approx");
  cluster->add_option("--window-k", run.window_k, "Occam's window ratio");
  cluster->add_option("--cut-height", run.cut_height, "dendrogram cut");
  cluster->add_option("--seed", run.seed, "master seed");
  cluster->add_option("--threads", run.threads,
                      "worker threads; 0 = library default");
  cluster->add_option("--config", config_path, "JSON config file");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate",
                                          "generate a labelled dataset");
  simulate->add_option("--output", sim.output, "output directory");
  simulate->add_option("--n", sim.n, "observations");
  simulate->add_option("--d-total", sim.d_total, "total variables");
  simulate->add_option("--d-relevant", sim.d_relevant, "relevant variables");
  simulate->add_option("--weights", sim.weights, "component weights");
  simulate->add_option("--means", sim.means,
                       "per-component means, ';' between components");
  simulate->add_option("--cov2", sim.cov2,
                       "component:a,b,c,d explicit 2x2 covariance");
  simulate->add_option("--seed", sim.seed, "generator seed");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate",
                                          "score run artifacts against truth");
  evaluate->add_option("--run", ev.run, "cluster output directory")->required();
  evaluate->add_option("--truth", ev.truth, "truth JSON")->required();
  evaluate->add_option("--output", ev.output, "metrics JSON (default stdout)");
  evaluate->add_option("--criterion", ev.criterion, "ml | pml");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cluster->parsed()) {
      // defaults < config file < explicit flags
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
          throw sugs::invalid_input("cannot open config " + config_path);
        json j;
        try {
          in >> j;
        } catch (const json::exception& e) {
          throw sugs::invalid_input(config_path + ": " + e.what());
        }
        RunConfig merged;
        config_from_json(j, merged);
        auto keep_flag = [&](const std::string& name) {
          return cluster->count(name) > 0;
        };
        if (!keep_flag("--input")) run.input = merged.input.empty()
                                                   ? run.input
                                                   : merged.input;
        if (!keep_flag("--output")) run.output = merged.output;
        if (!keep_flag("--standardize")) run.standardize = merged.standardize;
        if (!keep_flag("--mu0")) run.mu0 = merged.mu0;
        if (!keep_flag("--lambda0")) run.lambda0 = merged.lambda0;
        if (!keep_flag("--nu0")) run.nu0 = merged.nu0;
        if (!keep_flag("--s0")) run.s0 = merged.s0;
        if (!keep_flag("--beta-grid")) run.beta_grid = merged.beta_grid;
        if (!keep_flag("--kappa-mode")) run.kappa_mode = merged.kappa_mode;
        if (!keep_flag("--kappa")) run.kappa = merged.kappa;
        if (!keep_flag("--prior-on")) run.prior_on = merged.prior_on;
        if (!keep_flag("--iterations")) run.iterations = merged.iterations;
        if (!keep_flag("--subsamples")) run.subsamples = merged.subsamples;
        if (!keep_flag("--orderings")) run.orderings = merged.orderings;
        if (!keep_flag("--orderings-per-subsample"))
          run.orderings_per_subsample = merged.orderings_per_subsample;
        if (!keep_flag("--p1-fraction")) run.p1_fraction = merged.p1_fraction;
        if (!keep_flag("--criterion")) run.criterion = merged.criterion;
        if (!keep_flag("--pml-mode")) run.pml_mode = merged.pml_mode;
        if (!keep_flag("--window-k")) run.window_k = merged.window_k;
        if (!keep_flag("--cut-height")) run.cut_height = merged.cut_height;
        if (!keep_flag("--seed")) run.seed = merged.seed;
        if (!keep_flag("--threads")) run.threads = merged.threads;
      }
      // environment default for the worker pool, overridden by the flag
      if (cluster->count("--threads") == 0) {
        if (const char* env = std::getenv("SUGSVARSEL_THREADS"))
          run.threads = std::atoi(env);
      }
      return cmd_cluster(run);
    }
    if (simulate->parsed()) return cmd_simulate(sim);
    if (evaluate->parsed()) return cmd_evaluate(ev);
  } catch (const sugs::invalid_input& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const sugs::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitAllFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

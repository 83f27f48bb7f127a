#include "sugs/bma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sugs {

CoClusterMatrix coclustering(std::span<const int> z) {
  CoClusterMatrix s(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < z.size(); ++j)
      s(i, j) = z[i] == z[j] ? 1.0 : 0.0;
  }
  return s;
}

std::vector<std::size_t> occams_window(std::span<const FittedModel> models,
                                       double window_k) {
  if (models.empty()) throw invalid_input("empty model set");
  if (!(window_k >= 1.0)) throw invalid_input("window_k must be >= 1");
  double best = -std::numeric_limits<double>::infinity();
  for (const FittedModel& m : models) best = std::max(best, m.log_ml);
  // uniform model prior: posterior ratios reduce to ML ratios
  const double log_k = std::log(window_k);
  std::vector<std::size_t> retained;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (best - models[i].log_ml <= log_k) retained.push_back(i);
  }
  return retained;
}

ModelWeights model_weights(std::span<const FittedModel> models,
                           double window_k) {
  ModelWeights w;
  w.window = occams_window(models, window_k);
  w.log_weights.reserve(w.window.size());
  for (std::size_t i : w.window) w.log_weights.push_back(models[i].log_ml);
  double norm = log_sum_exp(w.log_weights);
  for (double& lw : w.log_weights) lw -= norm;
  return w;
}

namespace {

CoClusterMatrix bma_coclustering_impl(std::span<const FittedModel> models,
                                      const ModelWeights& weights,
                                      bool parallel) {
  if (weights.window.empty()) throw invalid_input("empty model window");
  const std::size_t n = models[weights.window.front()].z.size();
  const std::size_t w_count = weights.window.size();
  std::vector<const int*> labels(w_count);
  std::vector<double> w(w_count);
  for (std::size_t m = 0; m < w_count; ++m) {
    const FittedModel& model = models[weights.window[m]];
    if (model.z.size() != n)
      throw invalid_input("models cover different numbers of observations");
    labels[m] = model.z.data();
    w[m] = std::exp(weights.log_weights[m]);
  }

  CoClusterMatrix s(n);
  // Each entry accumulates over the window in a fixed order, so results are
  // bitwise identical for any thread count.
  auto fill_row = [&](std::size_t i) {
    double* row = s.s.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        row[j] = 1.0;
        continue;
      }
      double acc = 0.0;
      for (std::size_t m = 0; m < w_count; ++m)
        if (labels[m][i] == labels[m][j]) acc += w[m];
      row[j] = std::clamp(acc, 0.0, 1.0);
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      fill_row(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) fill_row(i);
  }
  return s;
}

}  // namespace

CoClusterMatrix bma_coclustering(std::span<const FittedModel> models,
                                 const ModelWeights& weights) {
  return bma_coclustering_impl(models, weights, true);
}

CoClusterMatrix bma_coclustering_serial(std::span<const FittedModel> models,
                                        const ModelWeights& weights) {
  return bma_coclustering_impl(models, weights, false);
}

std::vector<double> bma_variable_scores(std::span<const FittedModel> models,
                                        const ModelWeights& weights) {
  if (weights.window.empty()) throw invalid_input("empty model window");
  const std::size_t n_vars = models[weights.window.front()].gamma.size();
  std::vector<double> f(n_vars, 0.0);
  for (std::size_t m = 0; m < weights.window.size(); ++m) {
    const FittedModel& model = models[weights.window[m]];
    if (model.gamma.size() != n_vars)
      throw invalid_input("models cover different numbers of variables");
    double w = std::exp(weights.log_weights[m]);
    for (std::size_t d = 0; d < n_vars; ++d)
      if (model.gamma.gamma[d]) f[d] += w;
  }
  for (double& v : f) v = std::clamp(v, 0.0, 1.0);
  return f;
}

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<int> summarize(const CoClusterMatrix& s_bmac, double cut_height) {
  const std::size_t n = s_bmac.n;
  if (n == 0) return {};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = s_bmac(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw invalid_input("co-clustering entries must lie in [0, 1]");
    }
  }

  // Lance-Williams average linkage over distance 1 - s. Slot b folds into
  // slot a; cluster ids record creation order for the tie-break.
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = 1.0 - s_bmac(i, j);

  std::vector<std::uint8_t> active(n, 1);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), std::size_t{0});
  std::vector<std::vector<int>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

  DisjointSet components(n);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 0;
    std::size_t best_lo = 0, best_hi = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        double d = dist[a * n + b];
        std::size_t lo = std::min(id[a], id[b]);
        std::size_t hi = std::max(id[a], id[b]);
        if (d < best_d ||
            (d == best_d && (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
          best_d = d;
          best_a = a;
          best_b = b;
          best_lo = lo;
          best_hi = hi;
        }
      }
    }

    if (best_d <= cut_height) {
      components.unite(members[best_a].front(), members[best_b].front());
    }
    // merged distances: weighted average of the two rows
    double wa = static_cast<double>(size[best_a]);
    double wb = static_cast<double>(size[best_b]);
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == best_a || c == best_b) continue;
      double d = (wa * dist[best_a * n + c] + wb * dist[best_b * n + c]) /
                 (wa + wb);
      dist[best_a * n + c] = d;
      dist[c * n + best_a] = d;
    }
    size[best_a] += size[best_b];
    active[best_b] = 0;
    id[best_a] = n + step;
    members[best_a].insert(members[best_a].end(), members[best_b].begin(),
                           members[best_b].end());
  }

  // compact labels in order of first appearance
  std::vector<int> labels(n, -1);
  std::vector<int> label_of_root(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int root = components.find(static_cast<int>(i));
    if (label_of_root[root] < 0) label_of_root[root] = next++;
    labels[i] = label_of_root[root];
  }
  return labels;
}

}  // namespace sugs

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sugs/common.hpp"
#include "sugs/model.hpp"

namespace sugs {

// Symmetric n x n matrix with unit diagonal; entry (i, j) is the probability
// that observations i and j share a cluster.
struct CoClusterMatrix {
  std::size_t n = 0;
  std::vector<double> s;  // row-major

  CoClusterMatrix() = default;
  explicit CoClusterMatrix(std::size_t n_) : n(n_), s(n_ * n_, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return s[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return s[i * n + j]; }
};

// Binary same-cluster indicator matrix of a partition.
CoClusterMatrix coclustering(std::span<const int> z);

// Indices of the models within a Bayes-factor ratio window_k of the best
// model, computed in log space under a uniform model prior. The best model
// is always retained. window_k >= 1; +infinity retains everything.
std::vector<std::size_t> occams_window(std::span<const FittedModel> models,
                                       double window_k);

struct ModelWeights {
  std::vector<std::size_t> window;  // retained model indices
  std::vector<double> log_weights;  // normalised over the window
};

ModelWeights model_weights(std::span<const FittedModel> models,
                           double window_k);

// Evidence-weighted average of the retained models' co-clustering matrices.
// Entry-parallel with a fixed-order inner reduction, so the result is
// identical for any thread count.
CoClusterMatrix bma_coclustering(std::span<const FittedModel> models,
                                 const ModelWeights& weights);
CoClusterMatrix bma_coclustering_serial(std::span<const FittedModel> models,
                                        const ModelWeights& weights);

// Evidence-weighted average of the retained switch vectors.
std::vector<double> bma_variable_scores(std::span<const FittedModel> models,
                                        const ModelWeights& weights);

// Average-linkage agglomerative clustering on distance 1 - s; the dendrogram
// is cut at cut_height (merges above the cut are discarded). Merge-order
// ties resolve to the lexicographically smallest pair of cluster ids, so
// dendrograms are platform independent. Returns compact labels in order of
// first appearance.
std::vector<int> summarize(const CoClusterMatrix& s_bmac,
                           double cut_height = 0.5);

}  // namespace sugs

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sugs/common.hpp"
#include "sugs/model.hpp"

namespace sugs {

// Synthetic Gaussian mixture with known truth: the first d_relevant columns
// carry the cluster structure, the remaining columns are standard Gaussian
// noise. A component may override the identity covariance with an explicit
// 2x2 matrix (d_relevant must then be 2).
struct ScenarioSpec {
  std::size_t n = 100;
  std::size_t d_total = 200;
  std::size_t d_relevant = 100;
  std::vector<double> weights;               // per component, sums to 1
  std::vector<std::vector<double>> means;    // per component, d_relevant values
  std::vector<std::optional<std::array<double, 4>>> cov2;  // row-major 2x2
  std::uint64_t seed = 1;

  void validate() const;

  // 100 observations, 200 variables, components at 0/2/-2 with weights
  // 0.5/0.3/0.2 and identity covariance.
  static ScenarioSpec high_dim(std::size_t d_relevant, std::uint64_t seed);
  // 1000 observations, 100 variables, same mixture.
  static ScenarioSpec large_n(std::size_t d_relevant, std::uint64_t seed);
  // 30 observations; isotropic components at (2,2) and (-3,-3) with weight
  // 0.4 each, a correlated component at (-3,4) with covariance
  // [[2,1],[1,2]] and weight 0.2, plus two noise variables.
  static ScenarioSpec correlated_pair(std::uint64_t seed);
};

struct LabeledDataset {
  Matrix data;
  std::vector<int> true_z;
  std::vector<std::uint8_t> true_gamma;
};

LabeledDataset simulate(const ScenarioSpec& spec);

// Hubert & Arabie adjusted Rand index from the contingency table; 1 for
// identical partitions up to relabelling. When the chance-correction
// denominator vanishes (both partitions degenerate in the same way), the
// index is 1 for equal partitions and 0 otherwise.
double adjusted_rand_index(std::span<const int> z1, std::span<const int> z2);

// (fraction of truly relevant variables switched on,
//  fraction of truly irrelevant variables switched off);
// an empty class counts as fully recovered.
std::pair<double, double> variable_recovery(
    std::span<const std::uint8_t> gamma, std::span<const std::uint8_t> truth);

// Type-7 (linear interpolation) quantile; p in [0, 1].
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

}  // namespace sugs

#include "sugs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace sugs {

void ScenarioSpec::validate() const {
  if (n == 0) throw invalid_input("scenario needs n >= 1");
  if (d_relevant > d_total)
    throw invalid_input("d_relevant exceeds d_total");
  if (weights.empty() || weights.size() != means.size())
    throw invalid_input("weights/means must describe the same components");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw invalid_input("negative component weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw invalid_input("component weights must sum to 1");
  for (const auto& m : means) {
    if (m.size() != d_relevant)
      throw invalid_input("component mean dimension mismatch");
  }
  if (!cov2.empty()) {
    if (cov2.size() != weights.size())
      throw invalid_input("cov2 must have one entry per component");
    for (const auto& c : cov2) {
      if (c && d_relevant != 2)
        throw invalid_input("explicit 2x2 covariance needs d_relevant == 2");
    }
  }
}

ScenarioSpec ScenarioSpec::high_dim(std::size_t d_relevant,
                                    std::uint64_t seed) {
  ScenarioSpec s;
  s.n = 100;
  s.d_total = 200;
  s.d_relevant = d_relevant;
  s.weights = {0.5, 0.3, 0.2};
  s.means = {std::vector<double>(d_relevant, 0.0),
             std::vector<double>(d_relevant, 2.0),
             std::vector<double>(d_relevant, -2.0)};
  s.seed = seed;
  return s;
}

ScenarioSpec ScenarioSpec::large_n(std::size_t d_relevant,
                                   std::uint64_t seed) {
  ScenarioSpec s = high_dim(d_relevant, seed);
  s.n = 1000;
  s.d_total = 100;
  return s;
}

ScenarioSpec ScenarioSpec::correlated_pair(std::uint64_t seed) {
  ScenarioSpec s;
  s.n = 30;
  s.d_total = 4;
  s.d_relevant = 2;
  s.weights = {0.4, 0.4, 0.2};
  s.means = {{2.0, 2.0}, {-3.0, -3.0}, {-3.0, 4.0}};
  s.cov2 = {std::nullopt, std::nullopt, std::array<double, 4>{2, 1, 1, 2}};
  s.seed = seed;
  return s;
}

LabeledDataset simulate(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 17));
  LabeledDataset out;
  out.data = Matrix(spec.n, spec.d_total);
  out.true_z.resize(spec.n);
  out.true_gamma.assign(spec.d_total, 0);
  for (std::size_t d = 0; d < spec.d_relevant; ++d) out.true_gamma[d] = 1;

  for (std::size_t r = 0; r < spec.n; ++r) {
    // component draw by CDF inversion
    double u = rng.uniform();
    std::size_t comp = 0;
    double cum = 0.0;
    for (std::size_t c = 0; c < spec.weights.size(); ++c) {
      cum += spec.weights[c];
      if (u < cum) {
        comp = c;
        break;
      }
      comp = c;  // u == 1 edge: last component
    }
    out.true_z[r] = static_cast<int>(comp);

    const bool correlated =
        !spec.cov2.empty() && spec.cov2[comp].has_value();
    if (correlated) {
      // Cholesky factor of [[a,b],[b,c]]: [[sqrt(a),0],[b/sqrt(a),sqrt(c-b^2/a)]]
      const auto& c2 = *spec.cov2[comp];
      double l11 = std::sqrt(c2[0]);
      double l21 = c2[1] / l11;
      double l22 = std::sqrt(c2[3] - l21 * l21);
      double e1 = rng.normal();
      double e2 = rng.normal();
      out.data(r, 0) = spec.means[comp][0] + l11 * e1;
      out.data(r, 1) = spec.means[comp][1] + l21 * e1 + l22 * e2;
    } else {
      for (std::size_t d = 0; d < spec.d_relevant; ++d)
        out.data(r, d) = spec.means[comp][d] + rng.normal();
    }
    for (std::size_t d = spec.d_relevant; d < spec.d_total; ++d)
      out.data(r, d) = rng.normal();
  }
  return out;
}

namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

double adjusted_rand_index(std::span<const int> z1, std::span<const int> z2) {
  if (z1.size() != z2.size())
    throw invalid_input("partitions must have equal length");
  const std::size_t n = z1.size();
  if (n == 0) throw invalid_input("empty partitions");

  std::map<int, std::size_t> relabel1, relabel2;
  std::vector<std::size_t> a, b;
  std::vector<std::size_t> idx1(n), idx2(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it1, fresh1] = relabel1.try_emplace(z1[i], relabel1.size());
    if (fresh1) a.push_back(0);
    idx1[i] = it1->second;
    ++a[it1->second];
    auto [it2, fresh2] = relabel2.try_emplace(z2[i], relabel2.size());
    if (fresh2) b.push_back(0);
    idx2[i] = it2->second;
    ++b[it2->second];
  }
  Matrix contingency(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) ++contingency(idx1[i], idx2[i]);

  double sum_ij = 0.0;
  for (double c : contingency.values) sum_ij += choose2(c);
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t s : a) sum_a += choose2(static_cast<double>(s));
  for (std::size_t s : b) sum_b += choose2(static_cast<double>(s));
  double expected = sum_a * sum_b / choose2(static_cast<double>(n));
  double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) {
    // both partitions degenerate (all singletons or a single cluster)
    bool equal = true;
    for (std::size_t i = 1; i < n && equal; ++i)
      for (std::size_t j = 0; j < i && equal; ++j)
        equal = (idx1[i] == idx1[j]) == (idx2[i] == idx2[j]);
    return equal ? 1.0 : 0.0;
  }
  return (sum_ij - expected) / (maximum - expected);
}

std::pair<double, double> variable_recovery(
    std::span<const std::uint8_t> gamma, std::span<const std::uint8_t> truth) {
  if (gamma.size() != truth.size())
    throw invalid_input("switch vectors must have equal length");
  std::size_t rel = 0, rel_hit = 0, irr = 0, irr_hit = 0;
  for (std::size_t d = 0; d < truth.size(); ++d) {
    if (truth[d]) {
      ++rel;
      if (gamma[d]) ++rel_hit;
    } else {
      ++irr;
      if (!gamma[d]) ++irr_hit;
    }
  }
  double r = rel == 0 ? 1.0 : static_cast<double>(rel_hit) / rel;
  double i = irr == 0 ? 1.0 : static_cast<double>(irr_hit) / irr;
  return {r, i};
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw invalid_input("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw invalid_input("p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double median(std::vector<double> values) {
  return quantile(std::move(values), 0.5);
}

}  // namespace sugs

#include "sugs/common.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sugs {

Matrix Matrix::select_columns(std::span<const std::size_t> idx) const {
  Matrix out(rows, idx.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = values.data() + r * cols;
    double* dst = out.values.data() + r * idx.size();
    for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
  }
  return out;
}

std::vector<double> Matrix::column_means() const {
  std::vector<double> mean(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = values.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) mean[c] += src[c];
  }
  if (rows > 0)
    for (double& m : mean) m /= static_cast<double>(rows);
  return mean;
}

double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;  // all -inf, or a nan/inf poisoned input
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t a, std::uint64_t b) {
  Rng mix(base);
  std::uint64_t s = mix.next() ^ (stream * 0x9e3779b97f4a7c15ULL);
  Rng mix2(s + a);
  std::uint64_t s2 = mix2.next() + b * 0xd1b54a32d192ed03ULL;
  Rng mix3(s2);
  return mix3.next();
}

std::vector<int> random_permutation(std::size_t n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.bounded(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng) {
  if (k > n) throw invalid_input("cannot sample " + std::to_string(k) +
                                 " items out of " + std::to_string(n));
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // partial Fisher-Yates: first k slots become the sample
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.bounded(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace sugs

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sugs {

inline constexpr std::string_view version = "0.1.0";

class invalid_input : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a posterior scale statistic loses positivity (cancellation in
// t - lambda*m^2) or a probability vector underflows to zero mass.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values[r * cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }

  Matrix select_columns(std::span<const std::size_t> idx) const;
  std::vector<double> column_means() const;
};

double log_sum_exp(std::span<const double> v);

// Deterministic splitmix64 stream. All randomness in the library flows from
// explicit seeds through this generator, independent of the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Box-Muller; consumes two uniforms per draw.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // [0, n), fixed-point multiply (bias < 2^-64)
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t a = 0, std::uint64_t b = 0);

std::vector<int> random_permutation(std::size_t n, Rng& rng);

// k distinct indices out of 0..n-1, returned sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng);

}  // namespace sugs

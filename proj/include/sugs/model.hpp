#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sugs {

// Binary variable-relevance switches gamma_d plus the shared prior
// probability that a variable is relevant.
struct SwitchVector {
  std::vector<std::uint8_t> gamma;
  double prior_on = 0.5;

  static SwitchVector all_on(std::size_t n_vars, double prior_on = 0.5) {
    SwitchVector s;
    s.gamma.assign(n_vars, 1);
    s.prior_on = prior_on;
    return s;
  }

  std::size_t size() const { return gamma.size(); }
  std::size_t count_on() const {
    std::size_t c = 0;
    for (auto g : gamma) c += g;
    return c;
  }
  std::vector<std::size_t> on_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t d = 0; d < gamma.size(); ++d)
      if (gamma[d]) idx.push_back(d);
    return idx;
  }
  bool all_off() const { return count_on() == 0; }
};

enum class Criterion { ml, pml };
enum class PmlMode { exact_loo, full_data_approx };

struct Provenance {
  std::size_t subsample = 0;  // which initial switch vector
  std::size_t ordering = 0;   // which random ordering
  std::uint64_t seed = 0;     // master seed of the search
};

struct FittedModel {
  std::vector<int> z;  // compact labels 0..K-1
  SwitchVector gamma;
  double log_ml = 0.0;
  std::optional<double> log_pml;
  Provenance provenance;
};

struct SearchFailure {
  std::size_t subsample = 0;
  std::ptrdiff_t ordering = -1;  // -1: the whole subsample failed
  std::string message;
};

struct ModelSet {
  std::vector<FittedModel> models;
  std::vector<SearchFailure> failures;
};

}  // namespace sugs

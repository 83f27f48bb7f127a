#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sugs/bma.hpp"
#include "sugs/common.hpp"
#include "sugs/eval.hpp"
#include "sugs/model.hpp"

namespace sugs {

// Numeric CSV with a mandatory header row and an optional leading id column
// (header cell "id", case-insensitive). Lines starting with '#' are
// provenance comments and are skipped. Comma separated, '.' decimal, UTF-8.
struct Table {
  std::vector<std::string> columns;  // variable names, id column excluded
  std::vector<std::string> ids;      // row ids (1..n when absent in the file)
  Matrix data;
};

Table read_csv(const std::filesystem::path& path);
Table read_csv(std::istream& in, const std::string& name);

void write_csv(const std::filesystem::path& path, const Table& table,
               const std::string& comment);

// In place: each column to mean 0, variance 1 (n-1 denominator). A constant
// column is centred and left unscaled.
void standardize_columns(Matrix& data);

// FNV-1a; stable across platforms, used for config provenance.
std::uint64_t fnv1a_hash(std::string_view text);

// dataset truth sidecar (true partition, true switches, generator echo)
void write_truth_json(const std::filesystem::path& path,
                      const LabeledDataset& dataset, const ScenarioSpec& spec);
struct Truth {
  std::vector<int> z;
  std::vector<std::uint8_t> gamma;
};
Truth read_truth_json(const std::filesystem::path& path);

// run artifacts
void write_models_json(const std::filesystem::path& path,
                       const ModelSet& models, std::uint64_t seed,
                       const std::string& config_hash);
ModelSet read_models_json(const std::filesystem::path& path);

void write_assignments_csv(const std::filesystem::path& path,
                           std::span<const std::string> ids,
                           std::span<const int> labels,
                           const std::string& comment);
std::vector<int> read_assignments_csv(const std::filesystem::path& path);

void write_coclustering_csv(const std::filesystem::path& path,
                            const CoClusterMatrix& s,
                            std::span<const std::string> ids,
                            const std::string& comment);

void write_variable_scores_csv(const std::filesystem::path& path,
                               std::span<const std::string> variables,
                               std::span<const std::uint8_t> gamma_best,
                               std::span<const double> f_bma,
                               const std::string& comment);

}  // namespace sugs

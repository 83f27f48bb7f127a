#include "sugs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sugs {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

bool is_id_header(const std::string& cell) {
  std::string t = trim(cell);
  return t.size() == 2 && (t[0] == 'i' || t[0] == 'I') &&
         (t[1] == 'd' || t[1] == 'D');
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  std::string t = trim(raw);
  if (t.empty())
    throw invalid_input("empty cell at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw invalid_input("cannot parse '" + t + "' as a number at row " +
                        std::to_string(row) + ", column " +
                        std::to_string(col));
  if (!std::isfinite(value))
    throw invalid_input("non-finite value at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
  return value;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write " + path.string());
  return out;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

Table read_csv(std::istream& in, const std::string& name) {
  Table table;
  std::string line;
  std::size_t lineno = 0;
  bool header_done = false;
  bool has_id = false;
  std::size_t n_value_cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells = split_line(line);
    if (!header_done) {
      has_id = is_id_header(cells.front());
      std::size_t start = has_id ? 1 : 0;
      if (cells.size() <= start)
        throw invalid_input(name + ": header declares no data columns");
      for (std::size_t c = start; c < cells.size(); ++c)
        table.columns.push_back(trim(cells[c]));
      n_value_cols = table.columns.size();
      header_done = true;
      continue;
    }
    std::size_t start = has_id ? 1 : 0;
    if (cells.size() != n_value_cols + start)
      throw invalid_input(name + ": row " + std::to_string(lineno) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(n_value_cols + start));
    table.ids.push_back(has_id ? trim(cells[0])
                               : std::to_string(table.ids.size() + 1));
    for (std::size_t c = 0; c < n_value_cols; ++c)
      table.data.values.push_back(parse_cell(cells[c + start], lineno, c + 1));
  }
  if (!header_done) throw invalid_input(name + ": missing header row");
  if (table.ids.empty()) throw invalid_input(name + ": no data rows");
  table.data.rows = table.ids.size();
  table.data.cols = n_value_cols;
  return table;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path.string());
  return read_csv(in, path.string());
}

void write_csv(const fs::path& path, const Table& table,
               const std::string& comment) {
  std::ofstream out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "id";
  for (const auto& c : table.columns) out << ',' << c;
  out << "\n";
  for (std::size_t r = 0; r < table.data.rows; ++r) {
    out << table.ids[r];
    for (std::size_t c = 0; c < table.data.cols; ++c)
      out << ',' << format_double(table.data(r, c));
    out << "\n";
  }
}

void standardize_columns(Matrix& data) {
  if (data.rows < 2) return;
  for (std::size_t c = 0; c < data.cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) mean += data(r, c);
    mean /= static_cast<double>(data.rows);
    double ss = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
      double d = data(r, c) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(data.rows - 1));
    if (sd == 0.0) sd = 1.0;  // constant column: centre only
    for (std::size_t r = 0; r < data.rows; ++r)
      data(r, c) = (data(r, c) - mean) / sd;
  }
}

std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_truth_json(const fs::path& path, const LabeledDataset& dataset,
                      const ScenarioSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["true_z"] = dataset.true_z;
  j["true_gamma"] = dataset.true_gamma;
  json s;
  s["n"] = spec.n;
  s["d_total"] = spec.d_total;
  s["d_relevant"] = spec.d_relevant;
  s["weights"] = spec.weights;
  s["means"] = spec.means;
  json cov = json::array();
  for (const auto& c : spec.cov2) {
    if (c)
      cov.push_back(std::vector<double>(c->begin(), c->end()));
    else
      cov.push_back(nullptr);
  }
  s["cov2"] = cov;
  j["scenario"] = s;
  open_out(path) << j.dump(2) << "\n";
}

Truth read_truth_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw invalid_input(path.string() + ": " + e.what());
  }
  Truth t;
  t.z = j.at("true_z").get<std::vector<int>>();
  t.gamma = j.at("true_gamma").get<std::vector<std::uint8_t>>();
  return t;
}

void write_models_json(const fs::path& path, const ModelSet& models,
                       std::uint64_t seed, const std::string& config_hash) {
  json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  json arr = json::array();
  for (std::size_t i = 0; i < models.models.size(); ++i) {
    const FittedModel& m = models.models[i];
    json e;
    e["id"] = i;
    e["subsample"] = m.provenance.subsample;
    e["ordering"] = m.provenance.ordering;
    e["log_ml"] = m.log_ml;
    if (m.log_pml)
      e["log_pml"] = *m.log_pml;
    else
      e["log_pml"] = nullptr;
    e["gamma"] = m.gamma.gamma;
    std::vector<int> z1(m.z.size());
    for (std::size_t r = 0; r < m.z.size(); ++r) z1[r] = m.z[r] + 1;
    e["z"] = z1;
    arr.push_back(std::move(e));
  }
  j["models"] = std::move(arr);
  json fails = json::array();
  for (const SearchFailure& f : models.failures) {
    fails.push_back({{"subsample", f.subsample},
                     {"ordering", f.ordering},
                     {"message", f.message}});
  }
  j["failures"] = std::move(fails);
  open_out(path) << j.dump(2) << "\n";
}

ModelSet read_models_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw invalid_input(path.string() + ": " + e.what());
  }
  ModelSet out;
  std::uint64_t seed = j.value("seed", std::uint64_t{0});
  for (const json& e : j.at("models")) {
    FittedModel m;
    for (int label : e.at("z").get<std::vector<int>>())
      m.z.push_back(label - 1);
    m.gamma.gamma = e.at("gamma").get<std::vector<std::uint8_t>>();
    m.log_ml = e.at("log_ml").get<double>();
    if (!e.at("log_pml").is_null())
      m.log_pml = e.at("log_pml").get<double>();
    m.provenance = {e.at("subsample").get<std::size_t>(),
                    e.at("ordering").get<std::size_t>(), seed};
    out.models.push_back(std::move(m));
  }
  for (const json& f : j.at("failures")) {
    out.failures.push_back({f.at("subsample").get<std::size_t>(),
                            f.at("ordering").get<std::ptrdiff_t>(),
                            f.at("message").get<std::string>()});
  }
  return out;
}

void write_assignments_csv(const fs::path& path,
                           std::span<const std::string> ids,
                           std::span<const int> labels,
                           const std::string& comment) {
  std::ofstream out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "id,cluster\n";
  for (std::size_t r = 0; r < ids.size(); ++r)
    out << ids[r] << ',' << labels[r] + 1 << "\n";
}

std::vector<int> read_assignments_csv(const fs::path& path) {
  Table t = read_csv(path);
  if (t.columns.size() != 1)
    throw invalid_input(path.string() + ": expected a single cluster column");
  std::vector<int> z;
  z.reserve(t.data.rows);
  for (std::size_t r = 0; r < t.data.rows; ++r)
    z.push_back(static_cast<int>(t.data(r, 0)) - 1);
  return z;
}

void write_coclustering_csv(const fs::path& path, const CoClusterMatrix& s,
                            std::span<const std::string> ids,
                            const std::string& comment) {
  std::ofstream out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out << (i ? "," : "") << ids[i];
  out << "\n";
  for (std::size_t i = 0; i < s.n; ++i) {
    for (std::size_t j = 0; j < s.n; ++j)
      out << (j ? "," : "") << format_double(s(i, j));
    out << "\n";
  }
}

void write_variable_scores_csv(const fs::path& path,
                               std::span<const std::string> variables,
                               std::span<const std::uint8_t> gamma_best,
                               std::span<const double> f_bma,
                               const std::string& comment) {
  std::ofstream out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "variable,gamma_best,f_bma\n";
  for (std::size_t d = 0; d < variables.size(); ++d) {
    out << variables[d] << ',' << static_cast<int>(gamma_best[d]) << ','
        << format_double(f_bma[d]) << "\n";
  }
}

}  // namespace sugs

#include "tabadm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabadm/errors.hpp"
#include "tabadm/rng.hpp"

namespace tabadm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, Index row, const std::string& col,
                  const std::string& path) {
  const auto fail = [&](const char* why) -> double {
    throw ConfigError(path + ": " + why + " at data row " + std::to_string(row) +
                      ", column '" + col + "'");
  };
  if (cell.empty()) return fail("blank cell");
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) return fail("non-numeric cell");
  if (!std::isfinite(value)) return fail("non-finite cell");
  return value;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Per-class row indices in original order. labels required.
std::pair<std::vector<Index>, std::vector<Index>> class_rows(const Dataset& ds) {
  std::vector<Index> inliers, outliers;
  for (Index i = 0; i < ds.n(); ++i)
    (ds.labels[static_cast<std::size_t>(i)] == 0 ? inliers : outliers)
        .push_back(i);
  return {std::move(inliers), std::move(outliers)};
}

std::vector<Index> shuffled(std::vector<Index> rows, Rng& rng) {
  const auto perm = rng.permutation(static_cast<Index>(rows.size()));
  std::vector<Index> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out[i] = rows[static_cast<std::size_t>(perm[i])];
  return out;
}

}  // namespace

double Dataset::anomaly_rate() const {
  if (labels.empty() || n() == 0) return 0.0;
  double sum = 0.0;
  for (int y : labels) sum += y;
  return sum / static_cast<double>(n());
}

Dataset Dataset::select(const std::vector<Index>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.X.resize(static_cast<Index>(rows.size()), dim());
  if (has_labels()) out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Index>(i)) = X.row(rows[i]);
    if (has_labels())
      out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw ConfigError(path + ": empty file, header row required");
  const auto header = split_line(line);
  if (header.empty()) throw ConfigError(path + ": empty header row");

  Index label_idx = -1;
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!label_column.empty() && header[c] == label_column)
      label_idx = static_cast<Index>(c);
    else
      ds.feature_names.push_back(header[c]);
  }
  if (!label_column.empty() && label_idx < 0)
    throw ConfigError(path + ": label column '" + label_column + "' not found");
  if (ds.feature_names.empty())
    throw ConfigError(path + ": no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    ++rows;
    if (cells.size() != header.size())
      throw ConfigError(path + ": data row " + std::to_string(rows) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], rows, header[c], path);
      if (static_cast<Index>(c) == label_idx) {
        if (v != 0.0 && v != 1.0)
          throw ConfigError(path + ": label must be 0 or 1 at data row " +
                            std::to_string(rows));
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (rows == 0) throw ConfigError(path + ": no data rows");

  const Index d = static_cast<Index>(ds.feature_names.size());
  ds.X.resize(rows, d);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < d; ++c)
      ds.X(r, c) = values[static_cast<std::size_t>(r * d + c)];
  ds.labels = std::move(labels);
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (std::size_t c = 0; c < ds.feature_names.size(); ++c) {
    if (c) out << ',';
    out << ds.feature_names[c];
  }
  if (ds.has_labels()) out << ',' << label_column;
  out << '\n';
  for (Index r = 0; r < ds.n(); ++r) {
    for (Index c = 0; c < ds.dim(); ++c) {
      if (c) out << ',';
      out << format_double(ds.X(r, c));
    }
    if (ds.has_labels()) out << ',' << ds.labels[static_cast<std::size_t>(r)];
    out << '\n';
  }
  if (!out) throw ConfigError("failed while writing " + path);
}

Normalizer fit_normalizer(const Matrix& train_x) {
  if (train_x.rows() < 1)
    throw ConfigError("fit_normalizer: need at least one row");
  Normalizer norm;
  norm.min = train_x.colwise().minCoeff();
  norm.max = train_x.colwise().maxCoeff();
  return norm;
}

Matrix apply_normalizer(const Normalizer& norm, const Matrix& x) {
  if (x.cols() != norm.min.size())
    throw std::invalid_argument("apply_normalizer: dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const double lo = norm.min[c], hi = norm.max[c];
    if (hi > lo) {
      const double span = hi - lo;
      for (Index r = 0; r < x.rows(); ++r)
        out(r, c) = 2.0 * (x(r, c) - lo) / span - 1.0;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

SplitResult stratified_split(const Dataset& ds, double train_frac,
                             std::uint64_t seed) {
  if (!ds.has_labels())
    throw ConfigError("stratified_split: dataset has no labels");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ConfigError("stratified_split: train_frac must be in (0, 1)");

  auto [inliers, outliers] = class_rows(ds);
  Rng rng(seed);

  SplitResult res;
  for (auto* rows : {&inliers, &outliers}) {
    if (rows->empty()) continue;
    const auto order = shuffled(*rows, rng);
    const Index nc = static_cast<Index>(order.size());
    Index n_train = static_cast<Index>(
        std::llround(train_frac * static_cast<double>(nc)));
    if (n_train >= nc) n_train = nc - 1;  // keep one test sample per class
    if (n_train < 0) n_train = 0;
    for (Index i = 0; i < nc; ++i)
      (i < n_train ? res.train_rows : res.test_rows)
          .push_back(order[static_cast<std::size_t>(i)]);
  }
  std::sort(res.train_rows.begin(), res.train_rows.end());
  std::sort(res.test_rows.begin(), res.test_rows.end());
  res.train = ds.select(res.train_rows);
  res.test = ds.select(res.test_rows);
  return res;
}

Dataset stratified_truncate(const Dataset& ds, Index max_rows,
                            std::uint64_t seed) {
  if (max_rows < 1) throw ConfigError("stratified_truncate: max_rows must be >= 1");
  if (ds.n() <= max_rows) return ds;
  if (!ds.has_labels())
    throw ConfigError("stratified_truncate: dataset has no labels");

  auto [inliers, outliers] = class_rows(ds);
  Index keep_out = static_cast<Index>(std::llround(
      static_cast<double>(max_rows) * static_cast<double>(outliers.size()) /
      static_cast<double>(ds.n())));
  keep_out = std::min<Index>(keep_out, static_cast<Index>(outliers.size()));
  Index keep_in = std::min<Index>(max_rows - keep_out,
                                  static_cast<Index>(inliers.size()));

  Rng rng(seed);
  std::vector<Index> rows;
  const auto in_order = shuffled(inliers, rng);
  const auto out_order = shuffled(outliers, rng);
  rows.insert(rows.end(), in_order.begin(), in_order.begin() + keep_in);
  rows.insert(rows.end(), out_order.begin(), out_order.begin() + keep_out);
  std::sort(rows.begin(), rows.end());
  return ds.select(rows);
}

ContaminationResult build_contaminated(const Dataset& train_pool, double ratio,
                                       const Dataset& test_pool,
                                       double test_ratio, std::uint64_t seed) {
  if (!train_pool.has_labels() || !test_pool.has_labels())
    throw ConfigError("build_contaminated: pools must carry labels");
  if (!(ratio >= 0.0 && ratio < 1.0) || !(test_ratio >= 0.0 && test_ratio < 1.0))
    throw ConfigError("build_contaminated: ratios must be in [0, 1)");

  Rng rng(seed);
  const auto build = [&](const Dataset& pool, double c,
                         const char* which) -> std::pair<Dataset, Index> {
    auto [inliers, outliers] = class_rows(pool);
    const Index n_in = static_cast<Index>(inliers.size());
    const Index want = static_cast<Index>(
        std::floor(c / (1.0 - c) * static_cast<double>(n_in)));
    if (want > static_cast<Index>(outliers.size()))
      throw ConfigError(std::string("build_contaminated: ") + which +
                        " pool needs " + std::to_string(want) +
                        " anomalies but has only " +
                        std::to_string(outliers.size()));
    const auto order = shuffled(outliers, rng);
    std::vector<Index> rows = inliers;
    rows.insert(rows.end(), order.begin(), order.begin() + want);
    std::sort(rows.begin(), rows.end());
    return {pool.select(rows), want};
  };

  ContaminationResult res;
  auto [train, n_train_anom] = build(train_pool, ratio, "train");
  auto [test, n_test_anom] = build(test_pool, test_ratio, "test");
  res.train = std::move(train);
  res.test = std::move(test);
  res.train_anomalies = n_train_anom;
  res.test_anomalies = n_test_anom;
  return res;
}

void write_split_manifest(const std::string& path,
                          const std::vector<Index>& train_rows,
                          const std::vector<Index>& test_rows) {
  nlohmann::json j;
  j["train_rows"] = train_rows;
  j["test_rows"] = test_rows;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace tabadm

#include "tabadm/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tabadm/errors.hpp"

namespace tabadm {
namespace {

void validate(const RankTable& table) {
  const auto n_datasets = static_cast<Index>(table.datasets.size());
  const auto n_methods = static_cast<Index>(table.methods.size());
  if (n_datasets < 1 || n_methods < 1)
    throw ConfigError("rank table needs at least one dataset and one method");
  if (static_cast<Index>(table.dims.size()) != n_datasets)
    throw std::invalid_argument("rank table: dims size mismatch");
  if (table.scores.rows() != n_datasets || table.scores.cols() != n_methods)
    throw std::invalid_argument("rank table: score matrix shape mismatch");
}

std::vector<Index> subgroup_rows(const RankTable& table, double tau) {
  if (!(tau >= 0.0 && tau <= 70.0))
    throw ConfigError("tau must lie in [0, 70], got " + std::to_string(tau));
  std::vector<double> dims;
  dims.reserve(table.dims.size());
  for (Index d : table.dims) dims.push_back(static_cast<double>(d));
  const double cutoff = nearest_rank_percentile(std::move(dims), tau);

  std::vector<Index> rows;
  for (Index i = 0; i < static_cast<Index>(table.dims.size()); ++i)
    if (static_cast<double>(table.dims[static_cast<std::size_t>(i)]) > cutoff)
      rows.push_back(i);
  return rows;
}

}  // namespace

double nearest_rank_percentile(std::vector<double> values, double tau) {
  if (values.empty())
    throw std::invalid_argument("nearest_rank_percentile: empty input");
  std::sort(values.begin(), values.end());
  if (tau <= 0.0) return values.front();
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(tau / 100.0 * n));
  rank = std::min(rank, values.size());
  rank = std::max<std::size_t>(rank, 1);
  return values[rank - 1];
}

std::vector<double> row_ranks(const Vector& scores) {
  const Index m = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores[a] > scores[b]; });

  std::vector<double> ranks(static_cast<std::size_t>(m), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Positions i..j-1 (0-based) share the average of ranks i+1..j.
    const double avg = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t p = i; p < j; ++p)
      ranks[static_cast<std::size_t>(order[p])] = avg;
    i = j;
  }
  return ranks;
}

std::vector<double> rank_by_percentile(const RankTable& table, double tau) {
  validate(table);
  const std::vector<Index> rows = subgroup_rows(table, tau);
  if (rows.empty())
    throw ConfigError("tau = " + std::to_string(tau) +
                      " leaves an empty dataset subgroup");

  const auto n_methods = static_cast<std::size_t>(table.methods.size());
  std::vector<double> avg(n_methods, 0.0);
  for (Index row : rows) {
    const std::vector<double> ranks =
        row_ranks(table.scores.row(row).transpose());
    for (std::size_t m = 0; m < n_methods; ++m) avg[m] += ranks[m];
  }
  for (double& a : avg) a /= static_cast<double>(rows.size());
  return avg;
}

Index subgroup_size(const RankTable& table, double tau) {
  validate(table);
  return static_cast<Index>(subgroup_rows(table, tau).size());
}

}  // namespace tabadm

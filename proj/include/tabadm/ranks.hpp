#pragma once

#include <string>
#include <vector>

#include "tabadm/types.hpp"

namespace tabadm {

/// One score per (dataset, method) pair, higher = better, plus each dataset's
/// feature count for percentile subgrouping.
struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::vector<Index> dims;  // feature count per dataset
  Matrix scores;            // rows = datasets, cols = methods
};

/// Nearest-rank percentile: the smallest element with at least tau percent of
/// the values at or below it (tau = 0 gives the minimum).
double nearest_rank_percentile(std::vector<double> values, double tau);

/// Ranks of one score row, 1 = best (highest), ties averaged.
std::vector<double> row_ranks(const Vector& scores);

/// Per-method rank averaged over the datasets whose dim strictly exceeds the
/// tau-th percentile of all dims. tau must lie in [0, 70]; an empty subgroup
/// is an error.
std::vector<double> rank_by_percentile(const RankTable& table, double tau);

/// Number of datasets in the tau subgroup (same selection rule as above).
Index subgroup_size(const RankTable& table, double tau);

}  // namespace tabadm

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabadm/types.hpp"

namespace tabadm {

/// In-memory tabular dataset: one row per sample, optional binary labels
/// (0 = inlier, 1 = outlier). Labels exist for splitting, contamination
/// control and metrics only; they are never visible to training.
struct Dataset {
  Matrix X;                                // n x d
  std::vector<int> labels;                 // empty when unlabeled
  std::vector<std::string> feature_names;  // size d

  [[nodiscard]] Index n() const { return X.rows(); }
  [[nodiscard]] Index dim() const { return X.cols(); }
  [[nodiscard]] bool has_labels() const { return !labels.empty(); }
  [[nodiscard]] double anomaly_rate() const;

  /// Dataset restricted to the given rows, in the given order.
  [[nodiscard]] Dataset select(const std::vector<Index>& rows) const;
};

/// Parses a headered CSV of numeric cells. If label_column is non-empty,
/// that column is split off as 0/1 labels; every remaining cell must be a
/// finite number. Errors name the offending row and column.
Dataset load_csv(const std::string& path, const std::string& label_column = "");

/// Writes a dataset back to CSV with round-trip double formatting.
void save_csv(const Dataset& ds, const std::string& path,
              const std::string& label_column = "label");

/// Per-feature train min/max defining the affine map onto [-1, 1].
struct Normalizer {
  Vector min;
  Vector max;
};

/// Column-wise min/max of the training matrix.
Normalizer fit_normalizer(const Matrix& train_x);

/// x' = 2 (x - min) / (max - min) - 1 per feature. Constant features map
/// to 0. Values outside the train range are NOT clamped and land outside
/// [-1, 1].
Matrix apply_normalizer(const Normalizer& norm, const Matrix& x);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;  // indices into the source dataset
  std::vector<Index> test_rows;
};

/// Class-stratified train/test split: inliers and outliers are split
/// independently at train_frac (rounded to nearest), with at least one
/// test sample per nonempty class. Selected rows keep their original
/// relative order.
SplitResult stratified_split(const Dataset& ds, double train_frac,
                             std::uint64_t seed);

/// Stratified subsample to at most max_rows, preserving the anomaly rate
/// up to rounding.
Dataset stratified_truncate(const Dataset& ds, Index max_rows,
                            std::uint64_t seed);

struct ContaminationResult {
  Dataset train;  // all pool inliers plus sampled anomalies at ratio c
  Dataset test;   // test pool fixed at test_ratio anomalies
  Index train_anomalies = 0;
  Index test_anomalies = 0;
};

/// Builds a training set with a controlled anomaly ratio c: every inlier
/// of train_pool is kept and floor(c/(1-c) * #inliers) anomalies are
/// sampled in. The test pool is fixed at test_ratio the same way.
ContaminationResult build_contaminated(const Dataset& train_pool, double ratio,
                                       const Dataset& test_pool,
                                       double test_ratio, std::uint64_t seed);

/// Audit record of a split: row indices per side, as JSON.
void write_split_manifest(const std::string& path,
                          const std::vector<Index>& train_rows,
                          const std::vector<Index>& test_rows);

}  // namespace tabadm

#pragma once

#include <vector>

#include "tabadm/types.hpp"

namespace tabadm {

/// Distance to the k-th nearest training row (Euclidean), one score per test
/// row. Higher = more isolated from the training set.
std::vector<double> knn_score(const Matrix& train, const Matrix& test,
                              Index k = 5);

/// Histogram-based outlier score: per feature, an equal-width histogram over
/// the training range; a test row scores the sum over features of
/// -log(bin density + 1e-12). Out-of-range values fall into the nearest edge
/// bin; a constant feature acts as a single full-density bin.
std::vector<double> hbos_score(const Matrix& train, const Matrix& test,
                               Index bins = 10);

}  // namespace tabadm

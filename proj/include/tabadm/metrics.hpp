#pragma once

#include <vector>

#include "tabadm/types.hpp"

namespace tabadm {

struct MetricResult {
  double aucroc = 0.0;
  double ap = 0.0;
  Index n_pos = 0;
  Index n_neg = 0;
};

/// Probability that a random positive outscores a random negative, with half
/// credit for ties (Mann–Whitney convention). Exact: the pair statistic is
/// accumulated in integers before the final division.
double aucroc(const std::vector<double>& scores,
              const std::vector<int>& labels);

/// Step-interpolated average precision over descending score thresholds, with
/// tied scores grouped at a single threshold.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);

MetricResult evaluate(const std::vector<double>& scores,
                      const std::vector<int>& labels);

}  // namespace tabadm

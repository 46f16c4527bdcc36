#include "tabadm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tabadm/errors.hpp"

namespace tabadm {
namespace {

struct Counts {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

Counts validate(const std::vector<double>& scores,
                const std::vector<int>& labels, const char* fn) {
  if (scores.size() != labels.size())
    throw std::invalid_argument(std::string(fn) + ": got " +
                                std::to_string(scores.size()) + " scores but " +
                                std::to_string(labels.size()) + " labels");
  Counts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw std::invalid_argument(std::string(fn) + ": non-finite score at index " +
                                  std::to_string(i));
    if (labels[i] == 1)
      ++c.pos;
    else if (labels[i] == 0)
      ++c.neg;
    else
      throw std::invalid_argument(std::string(fn) + ": label at index " +
                                  std::to_string(i) + " is " +
                                  std::to_string(labels[i]) +
                                  ", expected 0 or 1");
  }
  if (c.pos == 0 || c.neg == 0)
    throw ConfigError(std::string(fn) +
                      ": undefined for single-class labels (need at least one "
                      "positive and one negative)");
  return c;
}

}  // namespace

double aucroc(const std::vector<double>& scores,
              const std::vector<int>& labels) {
  const Counts c = validate(scores, labels, "aucroc");
  const std::size_t n = scores.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Doubled U statistic: each positive earns 2 per negative strictly below it
  // and 1 per tied negative. Integer-exact until the final division.
  std::uint64_t u2 = 0;
  std::uint64_t neg_below = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::uint64_t tied_pos = 0;
    std::uint64_t tied_neg = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1)
        ++tied_pos;
      else
        ++tied_neg;
      ++j;
    }
    u2 += tied_pos * (2 * neg_below + tied_neg);
    neg_below += tied_neg;
    i = j;
  }
  return static_cast<double>(u2) /
         (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  const Counts c = validate(scores, labels, "average_precision");
  const std::size_t n = scores.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  double ap = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    std::uint64_t group_neg = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1)
        ++group_pos;
      else
        ++group_neg;
      ++j;
    }
    tp += group_pos;
    fp += group_neg;
    if (group_pos > 0)
      ap += (static_cast<double>(group_pos) / static_cast<double>(c.pos)) *
            (static_cast<double>(tp) / static_cast<double>(tp + fp));
    i = j;
  }
  return ap;
}

MetricResult evaluate(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  MetricResult r;
  r.aucroc = aucroc(scores, labels);
  r.ap = average_precision(scores, labels);
  for (int label : labels) {
    if (label == 1)
      ++r.n_pos;
    else
      ++r.n_neg;
  }
  return r;
}

}  // namespace tabadm

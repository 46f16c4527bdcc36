#include "tabadm/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tabadm/errors.hpp"

namespace tabadm {

std::vector<double> knn_score(const Matrix& train, const Matrix& test,
                              Index k) {
  const Index n_train = train.rows();
  const Index d = train.cols();
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  if (k > n_train)
    throw ConfigError("knn: k = " + std::to_string(k) + " exceeds the " +
                      std::to_string(n_train) + " training samples");
  if (test.rows() > 0 && test.cols() != d)
    throw std::invalid_argument("knn: train has " + std::to_string(d) +
                                " features, test has " +
                                std::to_string(test.cols()));

  std::vector<double> out(static_cast<std::size_t>(test.rows()));
  std::vector<double> sq(static_cast<std::size_t>(n_train));
  for (Index i = 0; i < test.rows(); ++i) {
    for (Index r = 0; r < n_train; ++r) {
      double acc = 0.0;
      for (Index j = 0; j < d; ++j) {
        const double diff = test(i, j) - train(r, j);
        acc += diff * diff;
      }
      sq[static_cast<std::size_t>(r)] = acc;
    }
    std::nth_element(sq.begin(), sq.begin() + (k - 1), sq.end());
    out[static_cast<std::size_t>(i)] =
        std::sqrt(sq[static_cast<std::size_t>(k - 1)]);
  }
  return out;
}

std::vector<double> hbos_score(const Matrix& train, const Matrix& test,
                               Index bins) {
  const Index n_train = train.rows();
  const Index d = train.cols();
  if (bins < 1) throw ConfigError("hbos: bins must be >= 1");
  if (n_train < 1) throw ConfigError("hbos: empty training set");
  if (test.rows() > 0 && test.cols() != d)
    throw std::invalid_argument("hbos: train has " + std::to_string(d) +
                                " features, test has " +
                                std::to_string(test.cols()));

  std::vector<double> lo(static_cast<std::size_t>(d));
  std::vector<double> hi(static_cast<std::size_t>(d));
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<std::size_t>(d),
      std::vector<std::int64_t>(static_cast<std::size_t>(bins), 0));

  const auto bin_of = [&](double v, Index j) -> Index {
    const double span = hi[static_cast<std::size_t>(j)] -
                        lo[static_cast<std::size_t>(j)];
    if (!(span > 0.0)) return 0;  // constant feature: one bin holds everything
    const double width = span / static_cast<double>(bins);
    const double raw =
        std::floor((v - lo[static_cast<std::size_t>(j)]) / width);
    if (raw < 0.0) return 0;
    if (raw >= static_cast<double>(bins)) return bins - 1;
    return static_cast<Index>(raw);
  };

  for (Index j = 0; j < d; ++j) {
    lo[static_cast<std::size_t>(j)] = train.col(j).minCoeff();
    hi[static_cast<std::size_t>(j)] = train.col(j).maxCoeff();
    for (Index r = 0; r < n_train; ++r)
      ++counts[static_cast<std::size_t>(j)]
              [static_cast<std::size_t>(bin_of(train(r, j), j))];
  }

  std::vector<double> out(static_cast<std::size_t>(test.rows()));
  for (Index i = 0; i < test.rows(); ++i) {
    double total = 0.0;
    for (Index j = 0; j < d; ++j) {
      const auto count = counts[static_cast<std::size_t>(j)]
                               [static_cast<std::size_t>(bin_of(test(i, j), j))];
      const double density =
          static_cast<double>(count) / static_cast<double>(n_train);
      total += -std::log(density + 1e-12);
    }
    out[static_cast<std::size_t>(i)] = total;
  }
  return out;
}

}  // namespace tabadm

#pragma once

#include <cstdint>
#include <vector>

#include "tabadm/trainer.hpp"
#include "tabadm/types.hpp"

namespace tabadm {

/// One inference pass over a test set: the fixed noise matrix, the seed it was
/// drawn from, and one score per test row (input order).
struct ScoreRun {
  Matrix noise;                // T×d, row t-1 holds E_t
  std::vector<double> scores;  // higher = more anomalous
  std::uint64_t seed = 0;
};

/// The noise matrix used when scoring with `seed`.
Matrix draw_noise(Index timesteps, Index dim, std::uint64_t seed);

/// Total denoising error of one sample: sum over t = 1..T of the per-timestep
/// loss against the fixed noise rows. `x0` must already be normalized with the
/// checkpoint's (train-fitted) normalizer.
double score_sample(const Checkpoint& ck, const Vector& x0,
                    const Matrix& noise);

/// Scores every row of `test` (raw feature space; normalization is applied
/// internally from the checkpoint). Rows are scored independently, optionally
/// across `threads` workers; output order always matches input order and is
/// bit-identical regardless of thread count.
///
/// With `fresh_noise` each row gets its own noise matrix derived from
/// (seed, row index) instead of the shared one; `noise` then records the
/// shared matrix that would have been used, for reference only.
ScoreRun score_set(const Checkpoint& ck, const Matrix& test,
                   std::uint64_t seed, int threads = 1,
                   bool fresh_noise = false);

}  // namespace tabadm

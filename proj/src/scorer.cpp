#include "tabadm/scorer.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "tabadm/diffusion.hpp"
#include "tabadm/errors.hpp"
#include "tabadm/model.hpp"
#include "tabadm/rng.hpp"

namespace tabadm {
namespace {

// Columns t-1 hold the resolved time conditioning for t = 1..T; computing the
// table once keeps the per-sample work to a single conditioned forward pass.
Matrix conditioning_table(const ModelConfig& cfg, const ModelParams& p,
                          Index timesteps) {
  Matrix table(p.b_t2.size(), timesteps);
  for (Index t = 1; t <= timesteps; ++t)
    table.col(t - 1) = time_conditioning(cfg, p, t);
  return table;
}

double score_one(const ModelConfig& cfg, const ModelParams& p,
                 const DiffusionSchedule& sched, const Vector& x0,
                 const Matrix& noise, const Matrix& cond) {
  const Index timesteps = sched.timesteps();
  const Index d = x0.size();
  Matrix x_t(d, timesteps);
  for (Index t = 1; t <= timesteps; ++t) {
    const double ab = sched.alpha_bar[t - 1];
    x_t.col(t - 1) =
        std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise.row(t - 1).transpose();
  }
  const Matrix eps_hat = forward_conditioned(p, x_t, cond, cfg.leaky_slope);
  double total = 0.0;
  for (Index t = 0; t < timesteps; ++t)
    total += sample_loss(noise.row(t).transpose(), eps_hat.col(t));
  return total;
}

}  // namespace

Matrix draw_noise(Index timesteps, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return rng.gaussian(timesteps, dim);
}

double score_sample(const Checkpoint& ck, const Vector& x0,
                    const Matrix& noise) {
  const Index timesteps = ck.schedule.timesteps();
  if (x0.size() != ck.model.input_dim)
    throw std::invalid_argument("score_sample: sample has " +
                                std::to_string(x0.size()) +
                                " features, checkpoint expects " +
                                std::to_string(ck.model.input_dim));
  if (noise.rows() != timesteps || noise.cols() != ck.model.input_dim)
    throw std::invalid_argument("score_sample: noise matrix shape mismatch");
  const Matrix cond = conditioning_table(ck.model, ck.params, timesteps);
  return score_one(ck.model, ck.params, ck.schedule, x0, noise, cond);
}

ScoreRun score_set(const Checkpoint& ck, const Matrix& test,
                   std::uint64_t seed, int threads, bool fresh_noise) {
  const Index timesteps = ck.schedule.timesteps();
  const Index d = ck.model.input_dim;
  const Index n = test.rows();
  if (n > 0 && test.cols() != d)
    throw std::invalid_argument("score_set: test set has " +
                                std::to_string(test.cols()) +
                                " features, checkpoint expects " +
                                std::to_string(d));

  ScoreRun run;
  run.seed = seed;
  run.noise = draw_noise(timesteps, d, seed);
  run.scores.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return run;

  const Matrix x = apply_normalizer(ck.normalizer, test);
  const Matrix cond = conditioning_table(ck.model, ck.params, timesteps);

  auto score_range = [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const Vector x0 = x.row(i).transpose();
      if (fresh_noise) {
        const Matrix own = draw_noise(timesteps, d, seed + 1 + static_cast<std::uint64_t>(i));
        run.scores[static_cast<std::size_t>(i)] =
            score_one(ck.model, ck.params, ck.schedule, x0, own, cond);
      } else {
        run.scores[static_cast<std::size_t>(i)] =
            score_one(ck.model, ck.params, ck.schedule, x0, run.noise, cond);
      }
    }
  };

  if (threads <= 1 || n == 1) {
    score_range(0, n);
    return run;
  }

  const Index workers = std::min<Index>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  // Contiguous stripes; each worker owns a disjoint slice of the output.
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(score_range, begin, end);
  }
  for (auto& th : pool) th.join();
  return run;
}

}  // namespace tabadm

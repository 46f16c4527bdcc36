#include "tabadm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabadm/errors.hpp"
#include "tabadm/metrics.hpp"
#include "tabadm/scorer.hpp"

namespace tabadm {

std::vector<Index> reject(const std::vector<double>& losses, Index m) {
  const Index k = static_cast<Index>(losses.size());
  if (k < 1) throw ConfigError("reject: empty batch");
  if (m < 0 || m >= k)
    throw ConfigError("reject: need 0 <= m < batch size, got m = " +
                      std::to_string(m) + ", k = " + std::to_string(k));
  std::vector<Index> order(losses.size());
  std::iota(order.begin(), order.end(), Index{0});
  // Stable sort ascending by loss: equal losses keep index order, so the
  // later-index occurrence of the maximum is dropped first.
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return losses[static_cast<std::size_t>(a)] <
           losses[static_cast<std::size_t>(b)];
  });
  std::vector<Index> kept(order.begin(), order.begin() + (k - m));
  std::sort(kept.begin(), kept.end());
  return kept;
}

StepDiagnostics train_step(ModelParams& params, const ModelConfig& mcfg,
                           const Matrix& x0, Rng& rng,
                           const DiffusionSchedule& sched,
                           const TrainConfig& cfg, Index step) {
  const Index d = x0.rows();
  const Index k = x0.cols();
  if (d != mcfg.input_dim)
    throw std::invalid_argument("train_step: batch dimension mismatch");

  // Draw order per step: noise first, then the shared timestep.
  const Matrix eps = rng.gaussian(k, d);  // row i = noise of sample i
  const Index t =
      1 + static_cast<Index>(rng.uniform_index(
              static_cast<std::uint64_t>(sched.timesteps())));

  const double ab = sched.alpha_bar[t - 1];
  const double c_signal = std::sqrt(ab);
  const double c_noise = std::sqrt(1.0 - ab);
  const Matrix x_t = c_signal * x0 + c_noise * eps.transpose();

  ForwardTape tape;
  const Matrix eps_hat = forward(mcfg, params, x_t, t, &tape);

  StepDiagnostics diag;
  diag.t = t;
  diag.losses.resize(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const double loss =
        sample_loss(eps.row(i).transpose(), eps_hat.col(i));
    if (!std::isfinite(loss))
      throw NumericalError("non-finite loss at step " + std::to_string(step) +
                           ", t = " + std::to_string(t) + ", batch sample " +
                           std::to_string(i));
    diag.losses[static_cast<std::size_t>(i)] = loss;
  }

  diag.kept = reject(diag.losses, cfg.reject_count);
  double mean = 0.0;
  for (Index i : diag.kept) mean += diag.losses[static_cast<std::size_t>(i)];
  diag.mean_kept_loss = mean / static_cast<double>(diag.kept.size());

  // dL/d eps_hat of the kept-mean loss; dropped samples contribute zero.
  const double scale =
      2.0 / (static_cast<double>(d) * static_cast<double>(diag.kept.size()));
  Matrix upstream = Matrix::Zero(d, k);
  for (Index i : diag.kept)
    upstream.col(i) = scale * (eps_hat.col(i) - eps.row(i).transpose());

  const ModelParams grads = backward(mcfg, params, tape, upstream);
  sgd_update(params, grads, cfg.learning_rate, cfg.weight_decay);
  return diag;
}

TrainResult train(const Matrix& x_normalized, const TrainConfig& cfg,
                  ModelConfig mcfg, const Normalizer& norm,
                  const EvalHook* eval_hook, const ProgressFn& progress) {
  const Index n = x_normalized.rows();
  const Index d = x_normalized.cols();
  if (n < 1) throw ConfigError("train: empty training set");
  if (cfg.steps < 1) throw ConfigError("train: steps must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (cfg.reject_count < 0 || cfg.reject_count >= cfg.batch_size)
    throw ConfigError("train: need 0 <= reject < batch size");

  mcfg.input_dim = d;
  mcfg.resolve();

  TrainConfig resolved = cfg;
  if (resolved.learning_rate == 0.0)
    resolved.learning_rate = learning_rate_for(d);
  if (!(resolved.learning_rate > 0.0))
    throw ConfigError("train: learning rate must be > 0");

  const DiffusionSchedule sched =
      linear_schedule(resolved.timesteps, resolved.beta_start, resolved.beta_end);

  Rng rng(resolved.seed);
  ModelParams params = init_params(mcfg, rng);

  TrainResult result;
  result.checkpoint.model = mcfg;
  result.checkpoint.train_config = resolved;
  result.checkpoint.schedule = sched;
  result.checkpoint.normalizer = norm;

  Matrix batch(d, resolved.batch_size);
  for (Index step = 1; step <= resolved.steps; ++step) {
    // Batch drawn uniformly with replacement; duplicates are fine.
    for (Index j = 0; j < resolved.batch_size; ++j) {
      const auto row = static_cast<Index>(
          rng.uniform_index(static_cast<std::uint64_t>(n)));
      batch.col(j) = x_normalized.row(row).transpose();
    }
    const StepDiagnostics diag =
        train_step(params, mcfg, batch, rng, sched, resolved, step);
    if (progress) progress(step, diag);

    if (eval_hook && resolved.eval_every > 0 &&
        (step % resolved.eval_every == 0 || step == resolved.steps)) {
      Checkpoint snapshot = result.checkpoint;
      snapshot.params = params;
      const ScoreRun run =
          score_set(snapshot, eval_hook->x, eval_hook->noise_seed);
      TracePoint tp;
      tp.step = step;
      tp.aucroc = aucroc(run.scores, eval_hook->labels);
      tp.ap = average_precision(run.scores, eval_hook->labels);
      result.trace.push_back(tp);
    }
  }

  result.checkpoint.params = std::move(params);
  return result;
}

}  // namespace tabadm

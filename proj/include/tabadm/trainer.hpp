#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tabadm/data.hpp"
#include "tabadm/diffusion.hpp"
#include "tabadm/model.hpp"
#include "tabadm/rng.hpp"
#include "tabadm/types.hpp"

namespace tabadm {

/// Training hyperparameters. learning_rate = 0 selects the per-dimension
/// default policy at train() time.
struct TrainConfig {
  Index batch_size = 8;      // k
  Index reject_count = 1;    // m, highest-loss samples dropped per batch
  Index steps = 50000;       // e
  double learning_rate = 0.0;
  double weight_decay = 1e-4;
  Index timesteps = 100;     // T
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::uint64_t seed = 0;
  Index eval_every = 0;      // checkpoint metric cadence, 0 = off
};

constexpr int kCheckpointFormatVersion = 1;

/// Everything needed to score new data: network weights, architecture,
/// schedule and the train-split normalization statistics.
struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  ModelConfig model;
  TrainConfig train_config;
  DiffusionSchedule schedule;
  Normalizer normalizer;
  ModelParams params;
};

/// Single JSON document, doubles serialized with round-trip precision.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Indices of the batch_size - m smallest losses, ascending by index.
/// Ties are broken by original batch position: among equal losses the
/// later index is dropped first.
std::vector<Index> reject(const std::vector<double>& losses, Index m);

/// Per-step record returned by train_step.
struct StepDiagnostics {
  Index t = 0;                  // shared timestep of the batch
  std::vector<double> losses;   // per-sample, before rejection
  std::vector<Index> kept;      // surviving batch positions
  double mean_kept_loss = 0.0;
};

/// One SGD update on a batch (one sample per column of x0): draws the
/// shared timestep and per-sample noise from rng, noises the batch,
/// computes per-sample losses, drops the reject_count worst, and applies
/// the gradient of the kept-mean loss with coupled weight decay.
/// Throws NumericalError on a non-finite loss. step is used only for
/// diagnostics.
StepDiagnostics train_step(ModelParams& params, const ModelConfig& mcfg,
                           const Matrix& x0, Rng& rng,
                           const DiffusionSchedule& sched,
                           const TrainConfig& cfg, Index step = 0);

/// Labeled hold-out set scored at every eval_every steps to trace metric
/// curves. Evaluation uses its own noise stream and never influences the
/// parameter updates.
struct EvalHook {
  Matrix x;                 // raw (unnormalized) rows
  std::vector<int> labels;  // 0/1
  std::uint64_t noise_seed = 0;
};

struct TracePoint {
  Index step = 0;
  double aucroc = 0.0;
  double ap = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<TracePoint> trace;
};

using ProgressFn = std::function<void(Index step, const StepDiagnostics&)>;

/// Full training loop over a normalized n x d sample matrix: batches are
/// drawn uniformly with replacement each step. The normalizer is embedded
/// in the checkpoint for inference-time use.
TrainResult train(const Matrix& x_normalized, const TrainConfig& cfg,
                  ModelConfig mcfg, const Normalizer& norm,
                  const EvalHook* eval_hook = nullptr,
                  const ProgressFn& progress = nullptr);

}  // namespace tabadm

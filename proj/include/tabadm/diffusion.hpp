#pragma once

#include "tabadm/types.hpp"

namespace tabadm {

/// Forward-process noise schedule. Arrays are indexed 0-based; entry i
/// belongs to timestep t = i + 1.
struct DiffusionSchedule {
  Vector beta;       // per-step noise variances
  Vector alpha;      // 1 - beta
  Vector alpha_bar;  // running product of alpha

  [[nodiscard]] Index timesteps() const { return beta.size(); }
};

/// Linearly spaced betas from beta_start to beta_end inclusive. A single
/// timestep degenerates to beta = [beta_start].
DiffusionSchedule linear_schedule(Index timesteps, double beta_start = 1e-4,
                                  double beta_end = 0.02);

/// Noised sample sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps.
/// t is 1-based, 1 <= t <= T.
Vector noise(const Vector& x0, Index t, const Vector& eps,
             const DiffusionSchedule& sched);

/// Mean squared difference between the true and predicted noise. Mean over
/// coordinates rather than sum, so the value is comparable across input
/// dimensions.
double sample_loss(const Vector& eps_true, const Vector& eps_pred);

}  // namespace tabadm

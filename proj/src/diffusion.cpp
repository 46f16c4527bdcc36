#include "tabadm/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tabadm/errors.hpp"

namespace tabadm {

DiffusionSchedule linear_schedule(Index timesteps, double beta_start,
                                  double beta_end) {
  if (timesteps < 1)
    throw ConfigError("linear_schedule: timesteps must be >= 1");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
    throw ConfigError("linear_schedule: need 0 < beta_start <= beta_end < 1");

  DiffusionSchedule s;
  s.beta.resize(timesteps);
  if (timesteps == 1) {
    s.beta[0] = beta_start;
  } else {
    const double step = (beta_end - beta_start) / static_cast<double>(timesteps - 1);
    for (Index i = 0; i < timesteps; ++i)
      s.beta[i] = beta_start + step * static_cast<double>(i);
  }
  s.alpha = Vector::Ones(timesteps) - s.beta;
  s.alpha_bar.resize(timesteps);
  double prod = 1.0;
  for (Index i = 0; i < timesteps; ++i) {
    prod *= s.alpha[i];
    s.alpha_bar[i] = prod;
  }
  return s;
}

Vector noise(const Vector& x0, Index t, const Vector& eps,
             const DiffusionSchedule& sched) {
  if (t < 1 || t > sched.timesteps())
    throw std::invalid_argument("noise: timestep " + std::to_string(t) +
                                " outside [1, " +
                                std::to_string(sched.timesteps()) + "]");
  if (x0.size() != eps.size())
    throw std::invalid_argument("noise: x0 and eps dimensions differ");
  const double ab = sched.alpha_bar[t - 1];
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

double sample_loss(const Vector& eps_true, const Vector& eps_pred) {
  if (eps_true.size() != eps_pred.size())
    throw std::invalid_argument("sample_loss: dimensions differ");
  // Plain loop: accumulation order is part of the reproducibility contract.
  double acc = 0.0;
  for (Index i = 0; i < eps_true.size(); ++i) {
    const double d = eps_true[i] - eps_pred[i];
    acc += d * d;
  }
  return acc / static_cast<double>(eps_true.size());
}

}  // namespace tabadm

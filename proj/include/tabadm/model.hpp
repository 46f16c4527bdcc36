#pragma once

#include "tabadm/rng.hpp"
#include "tabadm/types.hpp"

namespace tabadm {

/// Architecture hyperparameters of the noise-prediction network.
struct ModelConfig {
  Index input_dim = 0;       // feature count d
  Index hidden = 0;          // FC width H; 0 means "pick from input_dim"
  Index time_embed_dim = 64; // sinusoidal embedding size, must be even
  double leaky_slope = 0.2;

  /// Fills hidden with the width policy if it is unset.
  void resolve();
};

/// Default FC width for a given feature count: 512 up to d=100, 1024 up to
/// 1000, 2048 beyond (the policy table stops at 2000; larger inputs keep
/// 2048).
Index hidden_width_for(Index input_dim);

/// Default learning rate for a given feature count: 1e-3 up to d=100,
/// 2e-4 beyond.
double learning_rate_for(Index input_dim);

/// Transformer-style sinusoidal embedding of timestep t:
/// [sin(t*w_0), ..., sin(t*w_{h-1}), cos(t*w_0), ..., cos(t*w_{h-1})]
/// with h = dim/2 and w_j = 10000^(-j/(h-1)). For h = 1 the single
/// frequency is 1.
Vector time_embed(Index t, Index dim);

/// All weights and biases of the network. Weight shapes are (out x in);
/// batches are processed as column-per-sample matrices.
struct ModelParams {
  Matrix w_in;   Vector b_in;   // input projection, H x d
  Matrix w_t1;   Vector b_t1;   // time MLP first layer, H x D_t
  Matrix w_t2;   Vector b_t2;   // time MLP second layer, H x H
  Matrix w_r1;   Vector b_r1;   // ResBlock first linear, H x H
  Matrix w_r2;   Vector b_r2;   // ResBlock second linear, H x H
  Matrix w_out;  Vector b_out;  // output head, d x H
};

/// Kaiming-style uniform init: weights in +-sqrt(1/fan_in), biases zero.
/// Matrices are filled in declaration order, each row-major, so a seed
/// pins every parameter.
ModelParams init_params(const ModelConfig& cfg, Rng& rng);

/// All-zero parameter set with the right shapes (gradient accumulators).
ModelParams zero_params(const ModelConfig& cfg);

/// Intermediate activations recorded by a forward pass, as needed by
/// backward(). Columns index batch samples; the time path is shared by
/// the whole batch.
struct ForwardTape {
  Index t = 0;
  Vector emb;    // time embedding
  Vector z1;     // w_t1 * emb + b_t1
  Vector s1;     // SiLU(z1)
  Vector t_vec;  // w_t2 * s1 + b_t2
  Matrix x;      // network input, d x k
  Matrix h;      // input projection, H x k
  Matrix u;      // pre-activation of the ResBlock, h-path plus t_vec
  Matrix s;      // SiLU(u)
  Matrix r;      // residual sum h + w_r2 * s + b_r2
  Matrix a;      // LeakyReLU(r)
};

/// Time-conditioning vector for timestep t (the time-MLP output).
Vector time_conditioning(const ModelConfig& cfg, const ModelParams& p, Index t);

/// Forward pass with an explicit per-column conditioning matrix
/// (H x batch). Used directly by the scorer, where every column carries a
/// different timestep.
Matrix forward_conditioned(const ModelParams& p, const Matrix& x,
                           const Matrix& cond, double leaky_slope);

/// Batched forward pass for a shared timestep t. x is d x batch, one
/// sample per column; returns the predicted noise with the same shape.
/// Pass a tape to record intermediates for backward().
Matrix forward(const ModelConfig& cfg, const ModelParams& p, const Matrix& x,
               Index t, ForwardTape* tape = nullptr);

/// Reverse-mode gradients of a scalar loss with respect to every
/// parameter, given dL/d(eps_hat) for each batch column. The tape must
/// come from the matching forward() call.
ModelParams backward(const ModelConfig& cfg, const ModelParams& p,
                     const ForwardTape& tape, const Matrix& upstream);

/// In-place SGD step with coupled L2 weight decay:
/// theta <- theta - lr * (grad + wd * theta).
void sgd_update(ModelParams& p, const ModelParams& grads, double lr,
                double weight_decay);

}  // namespace tabadm

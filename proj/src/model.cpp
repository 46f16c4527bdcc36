#include "tabadm/model.hpp"

#include <cmath>
#include <stdexcept>

#include "tabadm/errors.hpp"

namespace tabadm {

namespace {

// SiLU(z) = z * sigmoid(z), written as z / (1 + exp(-z)).
inline Matrix silu(const Matrix& z) {
  return (z.array() / (1.0 + (-z.array()).exp())).matrix();
}

inline Vector silu(const Vector& z) {
  return (z.array() / (1.0 + (-z.array()).exp())).matrix();
}

// d/dz SiLU(z) = sigmoid(z) * (1 + z * (1 - sigmoid(z)))
template <typename T>
T silu_grad(const T& z) {
  auto sig = (1.0 / (1.0 + (-z.array()).exp())).eval();
  return (sig * (1.0 + z.array() * (1.0 - sig))).matrix();
}

// Gate at exactly zero takes the positive branch.
inline Matrix leaky_relu(const Matrix& z, double slope) {
  return (z.array() >= 0.0).select(z, slope * z);
}

inline Matrix leaky_relu_grad(const Matrix& z, double slope) {
  return (z.array() >= 0.0)
      .select(Matrix::Ones(z.rows(), z.cols()),
              Matrix::Constant(z.rows(), z.cols(), slope));
}

void check_dims(const ModelConfig& cfg) {
  if (cfg.input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
  if (cfg.hidden < 1) throw ConfigError("model: hidden width must be >= 1");
  if (cfg.time_embed_dim < 2 || cfg.time_embed_dim % 2 != 0)
    throw ConfigError("model: time_embed_dim must be even and >= 2");
}

// Uniform fill in +-sqrt(1/fan_in), row-major traversal.
void fill_uniform(Matrix& w, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(w.cols()));
  for (Index r = 0; r < w.rows(); ++r)
    for (Index c = 0; c < w.cols(); ++c)
      w(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
}

}  // namespace

void ModelConfig::resolve() {
  if (hidden == 0) hidden = hidden_width_for(input_dim);
}

Index hidden_width_for(Index input_dim) {
  if (input_dim <= 100) return 512;
  if (input_dim <= 1000) return 1024;
  return 2048;
}

double learning_rate_for(Index input_dim) {
  return input_dim <= 100 ? 1e-3 : 2e-4;
}

Vector time_embed(Index t, Index dim) {
  if (dim < 2 || dim % 2 != 0)
    throw ConfigError("time_embed: dim must be even and >= 2");
  if (t < 0) throw std::invalid_argument("time_embed: t must be >= 0");
  const Index half = dim / 2;
  Vector emb(dim);
  for (Index j = 0; j < half; ++j) {
    const double omega =
        half == 1 ? 1.0
                  : std::pow(10000.0, -static_cast<double>(j) /
                                          static_cast<double>(half - 1));
    const double arg = static_cast<double>(t) * omega;
    emb[j] = std::sin(arg);
    emb[half + j] = std::cos(arg);
  }
  return emb;
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
  check_dims(cfg);
  ModelParams p = zero_params(cfg);
  fill_uniform(p.w_in, rng);
  fill_uniform(p.w_t1, rng);
  fill_uniform(p.w_t2, rng);
  fill_uniform(p.w_r1, rng);
  fill_uniform(p.w_r2, rng);
  fill_uniform(p.w_out, rng);
  return p;
}

ModelParams zero_params(const ModelConfig& cfg) {
  check_dims(cfg);
  const Index d = cfg.input_dim, H = cfg.hidden, dt = cfg.time_embed_dim;
  ModelParams p;
  p.w_in = Matrix::Zero(H, d);   p.b_in = Vector::Zero(H);
  p.w_t1 = Matrix::Zero(H, dt);  p.b_t1 = Vector::Zero(H);
  p.w_t2 = Matrix::Zero(H, H);   p.b_t2 = Vector::Zero(H);
  p.w_r1 = Matrix::Zero(H, H);   p.b_r1 = Vector::Zero(H);
  p.w_r2 = Matrix::Zero(H, H);   p.b_r2 = Vector::Zero(H);
  p.w_out = Matrix::Zero(d, H);  p.b_out = Vector::Zero(d);
  return p;
}

Vector time_conditioning(const ModelConfig& cfg, const ModelParams& p,
                         Index t) {
  const Vector emb = time_embed(t, cfg.time_embed_dim);
  const Vector z1 = p.w_t1 * emb + p.b_t1;
  return p.w_t2 * silu(z1) + p.b_t2;
}

Matrix forward_conditioned(const ModelParams& p, const Matrix& x,
                           const Matrix& cond, double leaky_slope) {
  if (x.rows() != p.w_in.cols())
    throw std::invalid_argument("forward: input dimension mismatch");
  if (cond.rows() != p.w_r1.rows() || cond.cols() != x.cols())
    throw std::invalid_argument("forward: conditioning shape mismatch");
  Matrix h = (p.w_in * x).colwise() + p.b_in;
  Matrix u = ((p.w_r1 * h + cond).colwise() + p.b_r1).eval();
  Matrix s = silu(u);
  Matrix r = h + ((p.w_r2 * s).colwise() + p.b_r2);
  Matrix a = leaky_relu(r, leaky_slope);
  return (p.w_out * a).colwise() + p.b_out;
}

Matrix forward(const ModelConfig& cfg, const ModelParams& p, const Matrix& x,
               Index t, ForwardTape* tape) {
  if (x.rows() != cfg.input_dim)
    throw std::invalid_argument("forward: input dimension mismatch");
  const Vector emb = time_embed(t, cfg.time_embed_dim);
  const Vector z1 = p.w_t1 * emb + p.b_t1;
  const Vector s1 = silu(z1);
  const Vector t_vec = p.w_t2 * s1 + p.b_t2;

  Matrix h = (p.w_in * x).colwise() + p.b_in;
  Matrix u = (p.w_r1 * h).colwise() + (p.b_r1 + t_vec).eval();
  Matrix s = silu(u);
  Matrix r = h + ((p.w_r2 * s).colwise() + p.b_r2);
  Matrix a = leaky_relu(r, cfg.leaky_slope);
  Matrix out = (p.w_out * a).colwise() + p.b_out;

  if (tape) {
    tape->t = t;
    tape->emb = emb;
    tape->z1 = z1;
    tape->s1 = s1;
    tape->t_vec = t_vec;
    tape->x = x;
    tape->h = std::move(h);
    tape->u = std::move(u);
    tape->s = std::move(s);
    tape->r = std::move(r);
    tape->a = std::move(a);
  }
  return out;
}

ModelParams backward(const ModelConfig& cfg, const ModelParams& p,
                     const ForwardTape& tape, const Matrix& upstream) {
  if (upstream.rows() != cfg.input_dim || upstream.cols() != tape.x.cols())
    throw std::invalid_argument("backward: upstream shape mismatch");
  ModelParams g = zero_params(cfg);

  // Output head.
  g.b_out = upstream.rowwise().sum();
  g.w_out = upstream * tape.a.transpose();
  Matrix da = p.w_out.transpose() * upstream;

  // LeakyReLU and the residual sum r = h + (w_r2 s + b_r2).
  Matrix dr = da.cwiseProduct(leaky_relu_grad(tape.r, cfg.leaky_slope));
  g.b_r2 = dr.rowwise().sum();
  g.w_r2 = dr * tape.s.transpose();
  Matrix ds = p.w_r2.transpose() * dr;

  // SiLU and u = w_r1 h + b_r1 + t_vec.
  Matrix du = ds.cwiseProduct(silu_grad(tape.u));
  g.b_r1 = du.rowwise().sum();
  g.w_r1 = du * tape.h.transpose();

  // h feeds both the skip connection and the first ResBlock linear.
  Matrix dh = dr + p.w_r1.transpose() * du;
  g.b_in = dh.rowwise().sum();
  g.w_in = dh * tape.x.transpose();

  // Time path: t_vec is broadcast over the batch, so its gradient is the
  // row sum of du.
  Vector dt_vec = du.rowwise().sum();
  g.b_t2 = dt_vec;
  g.w_t2 = dt_vec * tape.s1.transpose();
  Vector ds1 = p.w_t2.transpose() * dt_vec;
  Vector dz1 = ds1.cwiseProduct(Vector(silu_grad(tape.z1)));
  g.b_t1 = dz1;
  g.w_t1 = dz1 * tape.emb.transpose();

  return g;
}

void sgd_update(ModelParams& p, const ModelParams& grads, double lr,
                double weight_decay) {
  const auto step = [&](Matrix& w, const Matrix& g) {
    w -= lr * (g + weight_decay * w);
  };
  const auto step_v = [&](Vector& b, const Vector& g) {
    b -= lr * (g + weight_decay * b);
  };
  step(p.w_in, grads.w_in);    step_v(p.b_in, grads.b_in);
  step(p.w_t1, grads.w_t1);    step_v(p.b_t1, grads.b_t1);
  step(p.w_t2, grads.w_t2);    step_v(p.b_t2, grads.b_t2);
  step(p.w_r1, grads.w_r1);    step_v(p.b_r1, grads.b_r1);
  step(p.w_r2, grads.w_r2);    step_v(p.b_r2, grads.b_r2);
  step(p.w_out, grads.w_out);  step_v(p.b_out, grads.b_out);
}

}  // namespace tabadm

#include "gridforge/uggan/generator.hpp"

#include <cmath>

#include "gridforge/common/error.hpp"

namespace gridforge::uggan {

namespace {

Mat uniform_matrix(int rows, int cols, double scale, Rng& rng) {
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

// Column-wise softmax of (logits + gumbel)/tau.
Mat soften(const Mat& perturbed, double tau) {
  Mat y = perturbed / tau;
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    auto col = y.col(c).array();
    col -= col.maxCoeff();
    col = col.exp();
    col /= col.sum();
  }
  return y;
}

}  // namespace

GeneratorGrads GeneratorGrads::zeros_like(const GeneratorParams& p) {
  GeneratorGrads g;
  g.w_init = Mat::Zero(p.w_init.rows(), p.w_init.cols());
  g.b_init = Vec::Zero(p.b_init.size());
  g.cell = LstmGrads::zeros_like(p.cell);
  g.w_proj = Mat::Zero(p.w_proj.rows(), p.w_proj.cols());
  g.b_proj = Vec::Zero(p.b_proj.size());
  return g;
}

double GeneratorGrads::squared_norm() const {
  return w_init.squaredNorm() + b_init.squaredNorm() + cell.w_x.squaredNorm() +
         cell.w_h.squaredNorm() + cell.b.squaredNorm() + w_proj.squaredNorm() +
         b_proj.squaredNorm();
}

void GeneratorGrads::scale(double s) {
  w_init *= s;
  b_init *= s;
  cell.w_x *= s;
  cell.w_h *= s;
  cell.b *= s;
  w_proj *= s;
  b_proj *= s;
}

GeneratorParams init_generator_params(int token_dim, int hidden, int noise_dim,
                                      double z_sigma, Rng& rng) {
  GeneratorParams p;
  p.z_sigma = z_sigma;
  p.w_init = uniform_matrix(2 * hidden, noise_dim, 1.0 / std::sqrt(noise_dim), rng);
  p.b_init = Vec::Zero(2 * hidden);
  p.cell.w_x = uniform_matrix(4 * hidden, token_dim, 1.0 / std::sqrt(token_dim), rng);
  p.cell.w_h = uniform_matrix(4 * hidden, hidden, 1.0 / std::sqrt(hidden), rng);
  p.cell.b = Vec::Zero(4 * hidden);
  p.cell.b.segment(hidden, hidden).setOnes();  // forget-gate bias
  p.w_proj = uniform_matrix(token_dim, hidden, 1.0 / std::sqrt(hidden), rng);
  p.b_proj = Vec::Zero(token_dim);
  return p;
}

std::pair<Mat, Mat> init_generator_state(const GeneratorParams& p, const Mat& z) {
  if (z.rows() != p.noise_dim()) throw ConfigError("init_generator_state: noise dim mismatch");
  if (!z.allFinite()) throw NumericError("init_generator_state: non-finite noise");
  Mat hc = p.w_init * z;
  hc.colwise() += p.b_init;
  const int hidden = p.hidden();
  return {hc.topRows(hidden), hc.bottomRows(hidden)};
}

Mat generator_step(const GeneratorParams& p, GenState& state, const Mat& v_prev) {
  if (v_prev.rows() != p.token_dim() || v_prev.cols() != state.h.cols())
    throw ConfigError("generator_step: token shape mismatch");
  lstm_forward(p.cell, v_prev, state.h, state.c, nullptr);
  Mat logits = p.w_proj * state.h;
  logits.colwise() += p.b_proj;
  return logits;
}

Vec gumbel_sample(const Vec& logits, double temperature, Rng& rng) {
  if (temperature <= 0.0) throw ConfigError("gumbel_sample: temperature must be > 0");
  Vec perturbed(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) perturbed[i] = logits[i] + rng.gumbel();
  Eigen::Index argmax;
  perturbed.maxCoeff(&argmax);
  Vec onehot = Vec::Zero(logits.size());
  onehot[argmax] = 1.0;
  return onehot;
}

GenRollout generate_rollout(const GeneratorParams& p, const Mat& z,
                            const std::vector<Mat>& gumbel, double temperature,
                            SampleMode mode, bool keep_cache) {
  if (temperature <= 0.0) throw ConfigError("generate_rollout: temperature must be > 0");
  const int batch = static_cast<int>(z.cols());
  const int n_steps = static_cast<int>(gumbel.size());
  const int dim = p.token_dim();

  GenRollout roll;
  roll.mode = mode;
  roll.tau = temperature;
  roll.z = z;
  roll.token_idx.resize(n_steps);
  if (mode != SampleMode::Hard) roll.y_soft.resize(n_steps);
  if (keep_cache) {
    roll.cell_cache.resize(n_steps);
    roll.h_post.resize(n_steps);
  }

  auto [h, c] = init_generator_state(p, z);
  if (keep_cache) {
    roll.h0 = h;
    roll.c0 = c;
  }

  OneHotBatch prev_idx(batch, -1);  // v_0 = 0
  Mat prev_soft;                    // Soft mode feeds the softened token forward
  for (int t = 0; t < n_steps; ++t) {
    LstmStepCache* cache = keep_cache ? &roll.cell_cache[t] : nullptr;
    if (mode == SampleMode::Soft && t > 0) {
      lstm_forward(p.cell, prev_soft, h, c, cache);
    } else {
      lstm_forward(p.cell, prev_idx, h, c, cache);
    }
    Mat logits = p.w_proj * h;
    logits.colwise() += p.b_proj;
    if (gumbel[t].rows() != dim || gumbel[t].cols() != batch)
      throw ConfigError("generate_rollout: gumbel noise shape mismatch");
    Mat perturbed = logits + gumbel[t];

    OneHotBatch& idx = roll.token_idx[t];
    idx.resize(batch);
    for (int b = 0; b < batch; ++b) {
      Eigen::Index argmax;
      perturbed.col(b).maxCoeff(&argmax);
      idx[b] = static_cast<int>(argmax);
    }
    if (mode != SampleMode::Hard) {
      roll.y_soft[t] = soften(perturbed, temperature);
      if (mode == SampleMode::Soft) prev_soft = roll.y_soft[t];
    }
    if (keep_cache) roll.h_post[t] = h;
    prev_idx = idx;
  }
  return roll;
}

GenRollout generate_rollout(const GeneratorParams& p, int batch, int n_steps,
                            double temperature, SampleMode mode, Rng& rng,
                            bool keep_cache) {
  Mat z(p.noise_dim(), batch);
  for (int b = 0; b < batch; ++b)
    for (int r = 0; r < p.noise_dim(); ++r) z(r, b) = p.z_sigma * rng.normal();
  std::vector<Mat> gumbel(n_steps);
  const int dim = p.token_dim();
  for (int t = 0; t < n_steps; ++t) {
    Mat u(dim, batch);
    for (int b = 0; b < batch; ++b)
      for (int r = 0; r < dim; ++r) u(r, b) = rng.uniform_open();
    gumbel[t] = (-(-u.array().log()).log()).matrix();
  }
  return generate_rollout(p, z, gumbel, temperature, mode, keep_cache);
}

GeneratorGrads generator_backward(const GeneratorParams& p, const GenRollout& roll,
                                  const std::vector<Mat>& dtokens) {
  if (roll.mode == SampleMode::Hard)
    throw ConfigError("generator_backward: Hard rollouts carry no gradient surrogate");
  if (roll.cell_cache.empty())
    throw ConfigError("generator_backward: rollout was made without keep_cache");
  const int n_steps = roll.n_steps();
  const int batch = roll.batch();
  const int hidden = p.hidden();

  GeneratorGrads grads = GeneratorGrads::zeros_like(p);
  Mat dh = Mat::Zero(hidden, batch);
  Mat dc = Mat::Zero(hidden, batch);
  Mat dv_chain;  // gradient reaching token t through the step t+1 cell input
  Mat dx(p.token_dim(), batch);

  for (int t = n_steps - 1; t >= 0; --t) {
    Mat dv = dtokens[t];
    if (dv_chain.size() > 0) dv += dv_chain;

    // Straight-through / soft surrogate: v ~ softmax((logits + g)/tau).
    const Mat& y = roll.y_soft[t];
    Mat dlogits(y.rows(), y.cols());
    for (int b = 0; b < batch; ++b) {
      const auto yb = y.col(b).array();
      const double dot = (yb * dv.col(b).array()).sum();
      dlogits.col(b) = ((yb * (dv.col(b).array() - dot)) / roll.tau).matrix();
    }

    grads.w_proj.noalias() += dlogits * roll.h_post[t].transpose();
    grads.b_proj += dlogits.rowwise().sum();
    dh.noalias() += p.w_proj.transpose() * dlogits;

    const bool need_dx = (t > 0);
    lstm_backward(p.cell, roll.cell_cache[t], dh, dc, grads.cell, need_dx ? &dx : nullptr);
    if (need_dx)
      dv_chain = dx;
    else
      dv_chain.resize(0, 0);
  }

  // Through the affine init map: d(h0, c0) -> (w_init, b_init).
  Mat dhc(2 * hidden, batch);
  dhc.topRows(hidden) = dh;
  dhc.bottomRows(hidden) = dc;
  grads.w_init.noalias() += dhc * roll.z.transpose();
  grads.b_init += dhc.rowwise().sum();
  return grads;
}

}  // namespace gridforge::uggan

#include "gridforge/uggan/critic.hpp"

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
}  // namespace

CriticGrads CriticGrads::zeros_like(const CriticParams& p) {
  CriticGrads g;
  g.w_embed = Mat::Zero(p.w_embed.rows(), p.w_embed.cols());
  g.b_embed = Vec::Zero(p.b_embed.size());
  g.cell = LstmGrads::zeros_like(p.cell);
  g.w_out = Vec::Zero(p.w_out.size());
  g.b_out = 0.0;
  return g;
}

double CriticGrads::squared_norm() const {
  return w_embed.squaredNorm() + b_embed.squaredNorm() + cell.w_x.squaredNorm() +
         cell.w_h.squaredNorm() + cell.b.squaredNorm() + w_out.squaredNorm() + b_out * b_out;
}

void CriticGrads::scale(double s) {
  w_embed *= s;
  b_embed *= s;
  cell.w_x *= s;
  cell.w_h *= s;
  cell.b *= s;
  w_out *= s;
  b_out *= s;
}

CriticParams init_critic_params(int token_dim, int embed_dim, int hidden, Rng& rng) {
  CriticParams p;
  p.w_embed = uniform_matrix(embed_dim, token_dim, 1.0 / std::sqrt(token_dim), rng);
  p.b_embed = Vec::Zero(embed_dim);
  p.cell.w_x = uniform_matrix(4 * hidden, embed_dim, 1.0 / std::sqrt(embed_dim), rng);
  p.cell.w_h = uniform_matrix(4 * hidden, hidden, 1.0 / std::sqrt(hidden), rng);
  p.cell.b = Vec::Zero(4 * hidden);
  p.cell.b.segment(hidden, hidden).setOnes();
  p.w_out = uniform_matrix(hidden, 1, 1.0 / std::sqrt(hidden), rng).col(0);
  p.b_out = 0.0;
  return p;
}

namespace {

template <typename TokenAt>
CriticEval run_forward(const CriticParams& p, int n_steps, int batch, bool keep_cache,
                       TokenAt&& embed_step) {
  CriticEval eval;
  if (keep_cache) {
    eval.cache.embed.resize(n_steps);
    eval.cache.cell.resize(n_steps);
  }
  Mat h = Mat::Zero(p.hidden(), batch);
  Mat c = Mat::Zero(p.hidden(), batch);
  for (int t = 0; t < n_steps; ++t) {
    Mat e = embed_step(t);
    e.colwise() += p.b_embed;
    lstm_forward(p.cell, e, h, c, keep_cache ? &eval.cache.cell[t] : nullptr);
    if (keep_cache) eval.cache.embed[t] = std::move(e);
  }
  eval.scores = (h.transpose() * p.w_out).array() + p.b_out;
  if (keep_cache) eval.cache.h_final = std::move(h);
  return eval;
}

}  // namespace

CriticEval critic_forward(const CriticParams& p, const std::vector<OneHotBatch>& tokens,
                          bool keep_cache) {
  if (tokens.empty()) throw ConfigError("critic_forward: empty token sequence");
  const int batch = static_cast<int>(tokens.front().size());
  auto eval = run_forward(p, static_cast<int>(tokens.size()), batch, keep_cache,
                          [&](int t) {
                            Mat e = Mat::Zero(p.embed_dim(), batch);
                            for (int b = 0; b < batch; ++b) {
                              const int idx = tokens[t][b];
                              if (idx < 0 || idx >= p.token_dim())
                                throw ConfigError("critic_forward: token index out of range");
                              e.col(b) = p.w_embed.col(idx);
                            }
                            return e;
                          });
  if (keep_cache) eval.cache.token_idx = tokens;
  return eval;
}

CriticEval critic_forward(const CriticParams& p, const std::vector<Mat>& tokens,
                          bool keep_cache) {
  if (tokens.empty()) throw ConfigError("critic_forward: empty token sequence");
  if (tokens.front().rows() != p.token_dim())
    throw ConfigError("critic_forward: token dimension mismatch");
  const int batch = static_cast<int>(tokens.front().cols());
  auto eval = run_forward(p, static_cast<int>(tokens.size()), batch, keep_cache,
                          [&](int t) -> Mat { return p.w_embed * tokens[t]; });
  if (keep_cache) eval.cache.token_dense = tokens;
  return eval;
}

CriticGrads critic_backward(const CriticParams& p, const CriticCache& cache,
                            const Vec& dscores, std::vector<Mat>* dtokens) {
  const int n_steps = static_cast<int>(cache.cell.size());
  if (n_steps == 0) throw ConfigError("critic_backward: cache is empty");
  const int batch = static_cast<int>(dscores.size());

  CriticGrads grads = CriticGrads::zeros_like(p);
  grads.w_out = cache.h_final * dscores;
  grads.b_out = dscores.sum();

  Mat dh = p.w_out * dscores.transpose();  // H x B
  Mat dc = Mat::Zero(p.hidden(), batch);
  if (dtokens) dtokens->assign(n_steps, Mat());

  Mat de(p.embed_dim(), batch);
  for (int t = n_steps - 1; t >= 0; --t) {
    lstm_backward(p.cell, cache.cell[t], dh, dc, grads.cell, &de);
    grads.b_embed += de.rowwise().sum();
    if (!cache.token_idx.empty()) {
      for (int b = 0; b < batch; ++b) grads.w_embed.col(cache.token_idx[t][b]) += de.col(b);
    } else {
      grads.w_embed.noalias() += de * cache.token_dense[t].transpose();
    }
    if (dtokens) (*dtokens)[t] = p.w_embed.transpose() * de;
  }
  return grads;
}

double critic_score(const CriticParams& p, const walks::WalkTensor& walk) {
  if (walk.token_dim() != p.token_dim())
    throw ConfigError("critic_score: walk shape does not match critic configuration");
  std::vector<OneHotBatch> tokens(walk.n_steps());
  for (int t = 0; t < walk.n_steps(); ++t) tokens[t] = {walk.flat(t)};
  auto eval = critic_forward(p, tokens, false);
  const double score = eval.scores[0];
  if (!std::isfinite(score)) throw NumericError("critic_score: non-finite output");
  return score;
}

}  // namespace gridforge::uggan

#include "gridforge/uggan/lstm.hpp"

#include "gridforge/common/error.hpp"

namespace gridforge::uggan {

namespace {

// Shared tail of the forward pass once the pre-activations are in `pre`.
void finish_forward(const Mat& pre, Mat& h, Mat& c, LstmStepCache* cache) {
  const int hidden = static_cast<int>(h.rows());
  Mat gates(4 * hidden, h.cols());
  gates.topRows(hidden) = (1.0 / (1.0 + (-pre.topRows(hidden).array()).exp())).matrix();
  gates.middleRows(hidden, hidden) =
      (1.0 / (1.0 + (-pre.middleRows(hidden, hidden).array()).exp())).matrix();
  gates.middleRows(2 * hidden, hidden) = pre.middleRows(2 * hidden, hidden).array().tanh().matrix();
  gates.bottomRows(hidden) = (1.0 / (1.0 + (-pre.bottomRows(hidden).array()).exp())).matrix();

  if (cache) {
    cache->h_prev = h;
    cache->c_prev = c;
  }
  c = (gates.middleRows(hidden, hidden).array() * c.array() +
       gates.topRows(hidden).array() * gates.middleRows(2 * hidden, hidden).array())
          .matrix();
  Mat tanh_c = c.array().tanh().matrix();
  h = (gates.bottomRows(hidden).array() * tanh_c.array()).matrix();
  if (cache) {
    cache->gates = std::move(gates);
    cache->tanh_c = std::move(tanh_c);
  }
}

}  // namespace

void lstm_forward(const LstmParams& p, const OneHotBatch& x_idx, Mat& h, Mat& c,
                  LstmStepCache* cache) {
  if (static_cast<int>(x_idx.size()) != h.cols())
    throw ConfigError("lstm_forward: batch size mismatch");
  Mat pre = p.w_h * h;
  pre.colwise() += p.b;
  for (int col = 0; col < static_cast<int>(x_idx.size()); ++col) {
    const int idx = x_idx[col];
    if (idx < 0) continue;  // all-zero token
    if (idx >= p.input_dim()) throw ConfigError("lstm_forward: one-hot index out of range");
    pre.col(col) += p.w_x.col(idx);
  }
  if (cache) {
    cache->x_idx = x_idx;
    cache->x_dense.resize(0, 0);
  }
  finish_forward(pre, h, c, cache);
}

void lstm_forward(const LstmParams& p, const Mat& x_dense, Mat& h, Mat& c,
                  LstmStepCache* cache) {
  if (x_dense.rows() != p.input_dim() || x_dense.cols() != h.cols())
    throw ConfigError("lstm_forward: dense input shape mismatch");
  Mat pre = p.w_x * x_dense + p.w_h * h;
  pre.colwise() += p.b;
  if (cache) {
    cache->x_idx.clear();
    cache->x_dense = x_dense;
  }
  finish_forward(pre, h, c, cache);
}

void lstm_backward(const LstmParams& p, const LstmStepCache& cache, Mat& dh, Mat& dc,
                   LstmGrads& grads, Mat* dx) {
  const int hidden = static_cast<int>(dh.rows());
  const auto i = cache.gates.topRows(hidden).array();
  const auto f = cache.gates.middleRows(hidden, hidden).array();
  const auto g = cache.gates.middleRows(2 * hidden, hidden).array();
  const auto o = cache.gates.bottomRows(hidden).array();
  const auto tc = cache.tanh_c.array();

  Mat dc_total = (dc.array() + dh.array() * o * (1.0 - tc * tc)).matrix();

  Mat dpre(4 * hidden, dh.cols());
  dpre.topRows(hidden) = (dc_total.array() * g * i * (1.0 - i)).matrix();
  dpre.middleRows(hidden, hidden) =
      (dc_total.array() * cache.c_prev.array() * f * (1.0 - f)).matrix();
  dpre.middleRows(2 * hidden, hidden) = (dc_total.array() * i * (1.0 - g * g)).matrix();
  dpre.bottomRows(hidden) = (dh.array() * tc * o * (1.0 - o)).matrix();

  grads.b += dpre.rowwise().sum();
  grads.w_h.noalias() += dpre * cache.h_prev.transpose();
  if (!cache.x_idx.empty()) {
    for (int col = 0; col < static_cast<int>(cache.x_idx.size()); ++col) {
      const int idx = cache.x_idx[col];
      if (idx >= 0) grads.w_x.col(idx) += dpre.col(col);
    }
  } else if (cache.x_dense.size() > 0) {
    grads.w_x.noalias() += dpre * cache.x_dense.transpose();
  }
  if (dx) dx->noalias() = p.w_x.transpose() * dpre;

  // Previous-state gradients replace the incoming ones.
  dc = (dc_total.array() * f).matrix();
  dh.noalias() = p.w_h.transpose() * dpre;
}

}  // namespace gridforge::uggan

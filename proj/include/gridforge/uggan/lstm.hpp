// Column-batched LSTM cell with analytic backward pass.
//
// Gate order is [input, forget, cell, output]. Inputs may be dense matrices
// or one-hot column indices; the one-hot path touches a single column of the
// input weight matrix per sample.
#pragma once

#include <vector>

#include "gridforge/common/linalg.hpp"

namespace gridforge::uggan {

struct LstmParams {
  Mat w_x;  // 4H x in_dim
  Mat w_h;  // 4H x H
  Vec b;    // 4H

  int hidden() const { return static_cast<int>(w_h.cols()); }
  int input_dim() const { return static_cast<int>(w_x.cols()); }
};

struct LstmGrads {
  Mat w_x;
  Mat w_h;
  Vec b;

  static LstmGrads zeros_like(const LstmParams& p) {
    return {Mat::Zero(p.w_x.rows(), p.w_x.cols()), Mat::Zero(p.w_h.rows(), p.w_h.cols()),
            Vec::Zero(p.b.size())};
  }
};

// One-hot batch: index of the active row per column; -1 means the all-zero
// token (the generator's v_0).
using OneHotBatch = std::vector<int>;

struct LstmStepCache {
  Mat gates;   // 4H x B, post-activation [i, f, g, o]
  Mat h_prev;  // H x B
  Mat c_prev;  // H x B
  Mat tanh_c;  // H x B
  // Forward input, one representation active depending on the path taken.
  OneHotBatch x_idx;
  Mat x_dense;
};

// h, c are updated in place (H x B). When `cache` is non-null the values
// needed by the backward pass are recorded.
void lstm_forward(const LstmParams& p, const OneHotBatch& x_idx, Mat& h, Mat& c,
                  LstmStepCache* cache);
void lstm_forward(const LstmParams& p, const Mat& x_dense, Mat& h, Mat& c,
                  LstmStepCache* cache);

// Consumes dL/dh_t and dL/dc_t, emits dL/dh_{t-1} and dL/dc_{t-1} in place,
// and accumulates parameter gradients. When dx is non-null the dense input
// gradient (in_dim x B) is written to it.
void lstm_backward(const LstmParams& p, const LstmStepCache& cache, Mat& dh, Mat& dc,
                   LstmGrads& grads, Mat* dx);

}  // namespace gridforge::uggan

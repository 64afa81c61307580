// Recurrent walk generator.
//
// A noise vector is mapped by an affine init network to the LSTM start state;
// the cell then consumes the previous token (v_0 is the all-zero token) and a
// projection turns each hidden state into logits over every
// (phase, node, conductor) triple. Tokens are drawn by the Gumbel-max trick:
// the forward emission is an exact one-hot, the backward surrogate is the
// temperature-softened softmax (straight-through).
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gridforge/common/rng.hpp"
#include "gridforge/uggan/lstm.hpp"

namespace gridforge::uggan {

struct GeneratorParams {
  Mat w_init;  // 2H x Z   (top H rows -> h_0, bottom H rows -> C_0)
  Vec b_init;  // 2H
  LstmParams cell;  // input dim = token dim
  Mat w_proj;  // D x H
  Vec b_proj;  // D
  double z_sigma = 1.0;

  int hidden() const { return cell.hidden(); }
  int token_dim() const { return static_cast<int>(w_proj.rows()); }
  int noise_dim() const { return static_cast<int>(w_init.cols()); }
};

struct GeneratorGrads {
  Mat w_init;
  Vec b_init;
  LstmGrads cell;
  Mat w_proj;
  Vec b_proj;

  static GeneratorGrads zeros_like(const GeneratorParams& p);
  double squared_norm() const;
  void scale(double s);
};

GeneratorParams init_generator_params(int token_dim, int hidden, int noise_dim,
                                      double z_sigma, Rng& rng);

// (h_0, C_0) = affine(z); z is Z x B, outputs are H x B each.
std::pair<Mat, Mat> init_generator_state(const GeneratorParams& p, const Mat& z);

// Single-step interface: advances (h, c) and returns the logits (D x B).
struct GenState {
  Mat h;
  Mat c;
};
Mat generator_step(const GeneratorParams& p, GenState& state, const Mat& v_prev);

// Gumbel-max draw over one logit column: exact one-hot forward.
Vec gumbel_sample(const Vec& logits, double temperature, Rng& rng);

enum class SampleMode {
  Hard,             // one-hot tokens, no gradient bookkeeping
  StraightThrough,  // one-hot tokens forward, softmax surrogate backward
  Soft              // softened tokens fed forward; exactly differentiable
};

// Full unrolled rollout of `batch` walks of `n_steps` tokens.
struct GenRollout {
  SampleMode mode = SampleMode::Hard;
  double tau = 1.0;
  Mat z;                                   // Z x B
  std::vector<OneHotBatch> token_idx;      // T entries of length B (argmax picks)
  std::vector<Mat> y_soft;                 // T entries, D x B (empty in Hard mode)
  std::vector<LstmStepCache> cell_cache;   // T entries (empty in Hard mode)
  std::vector<Mat> h_post;                 // T entries, hidden after each step
  Mat h0, c0;
  int n_steps() const { return static_cast<int>(token_idx.size()); }
  int batch() const { return static_cast<int>(z.cols()); }
};

// Rollout with caller-supplied noise (deterministic; used by tests and by the
// seeded wrappers below). `gumbel` holds T matrices of shape D x B.
GenRollout generate_rollout(const GeneratorParams& p, const Mat& z,
                            const std::vector<Mat>& gumbel, double temperature,
                            SampleMode mode, bool keep_cache);

// Draws z ~ N(0, z_sigma^2) and Gumbel noise from `rng`, then rolls out.
GenRollout generate_rollout(const GeneratorParams& p, int batch, int n_steps,
                            double temperature, SampleMode mode, Rng& rng,
                            bool keep_cache);

// Backpropagation through a cached rollout. `dtokens` holds dL/dv_t for each
// step (D x B); gradients flow through the softmax surrogate and the
// recurrent token-feedback chain.
GeneratorGrads generator_backward(const GeneratorParams& p, const GenRollout& rollout,
                                  const std::vector<Mat>& dtokens);

}  // namespace gridforge::uggan

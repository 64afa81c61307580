// Recurrent critic over encoded walks.
//
// Each step's one-hot token is reshaped by a linear embedding, fed through an
// LSTM, and the final hidden state maps to one unbounded scalar per walk (the
// Wasserstein objective wants the raw critic value, not a probability).
#pragma once

#include <vector>

#include "gridforge/common/rng.hpp"
#include "gridforge/uggan/lstm.hpp"
#include "gridforge/walks/encoding.hpp"

namespace gridforge::uggan {

struct CriticParams {
  Mat w_embed;  // E x D
  Vec b_embed;  // E
  LstmParams cell;  // input dim = E
  Vec w_out;    // H
  double b_out = 0.0;

  int embed_dim() const { return static_cast<int>(w_embed.rows()); }
  int token_dim() const { return static_cast<int>(w_embed.cols()); }
  int hidden() const { return cell.hidden(); }
};

struct CriticGrads {
  Mat w_embed;
  Vec b_embed;
  LstmGrads cell;
  Vec w_out;
  double b_out = 0.0;

  static CriticGrads zeros_like(const CriticParams& p);
  double squared_norm() const;
  void scale(double s);
};

CriticParams init_critic_params(int token_dim, int embed_dim, int hidden, Rng& rng);

struct CriticCache {
  // Embedded inputs and cell caches per step; final hidden per walk.
  std::vector<Mat> embed;             // T entries, E x B
  std::vector<LstmStepCache> cell;    // T entries
  std::vector<OneHotBatch> token_idx; // kept when tokens were one-hot
  std::vector<Mat> token_dense;       // kept when tokens were dense
  Mat h_final;                        // H x B
};

struct CriticEval {
  Vec scores;  // B
  CriticCache cache;
};

// Tokens as one-hot indices: token_idx[t][b] in [0, D).
CriticEval critic_forward(const CriticParams& p, const std::vector<OneHotBatch>& tokens,
                          bool keep_cache);
// Dense tokens (soft rollouts in gradient checks).
CriticEval critic_forward(const CriticParams& p, const std::vector<Mat>& tokens,
                          bool keep_cache);

// Backward from per-walk score gradients. When `dtokens` is non-null the
// dense input gradients (one D x B matrix per step) are produced, which is
// what the generator update chains through.
CriticGrads critic_backward(const CriticParams& p, const CriticCache& cache,
                            const Vec& dscores, std::vector<Mat>* dtokens);

// Single-walk convenience used by the spec-level operation.
double critic_score(const CriticParams& p, const walks::WalkTensor& walk);

}  // namespace gridforge::uggan

// Product-Gaussian kernel density estimation and slot-conditional densities.
#pragma once

#include <optional>
#include <vector>

#include "gridforge/common/linalg.hpp"
#include "gridforge/common/rng.hpp"

namespace gridforge::loadsynth {

struct KdeModel {
  Mat samples;     // n x d
  Vec bandwidths;  // d, all > 0

  int n() const { return static_cast<int>(samples.rows()); }
  int dims() const { return static_cast<int>(samples.cols()); }

  // f(x) = (1 / (n * prod h_j)) * sum_i prod_j K((x_j - X_ij) / h_j).
  double pdf(const Vec& x) const;
};

// "auto" bandwidths use Silverman's rule 1.06 * sigma_j * n^(-1/5); a zero
// sample variance in any dimension makes that rule break down.
KdeModel fit_kde(const Mat& samples, const std::optional<Vec>& bandwidths = std::nullopt);

// Conditional over the first variable given the second: with product
// Gaussian kernels the ratio f(P, t_s)/f(t_s) is a kernel mixture whose
// weights are w_i ∝ K((t_s - t_i)/h_t).
struct Conditional1D {
  Vec centers;   // kernel centers over P
  Vec weights;   // normalized mixture weights
  double bandwidth = 0.0;

  double pdf(double x) const;
  // Mixture draw: pick a kernel by weight, then one Gaussian sample.
  double sample(Rng& rng) const;
};

// Requires a 2-column model over (P, t). Throws when the marginal f(t = t_s)
// is below 1e-12 (unsupported slot).
Conditional1D conditional_density(const KdeModel& model, double t_s);

}  // namespace gridforge::loadsynth

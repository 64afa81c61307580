#include "gridforge/loadsynth/kde.hpp"

#include <cmath>

#include "gridforge/common/error.hpp"

namespace gridforge::loadsynth {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}

double KdeModel::pdf(const Vec& x) const {
  if (x.size() != dims()) throw InvalidInputError("KdeModel::pdf: dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < n(); ++i) {
    double term = 1.0;
    for (int j = 0; j < dims(); ++j) {
      const double u = (x[j] - samples(i, j)) / bandwidths[j];
      term *= kInvSqrt2Pi * std::exp(-0.5 * u * u);
    }
    total += term;
  }
  return total / (n() * bandwidths.prod());
}

KdeModel fit_kde(const Mat& samples, const std::optional<Vec>& bandwidths) {
  if (samples.rows() < 1 || samples.cols() < 1)
    throw InvalidInputError("fit_kde: need at least one sample and one dimension");
  KdeModel model;
  model.samples = samples;
  if (bandwidths) {
    if (bandwidths->size() != samples.cols())
      throw ConfigError("fit_kde: bandwidth count must match dimensions");
    if ((bandwidths->array() <= 0.0).any())
      throw ConfigError("fit_kde: bandwidths must be > 0");
    model.bandwidths = *bandwidths;
    return model;
  }
  const int n = static_cast<int>(samples.rows());
  if (n < 2) throw NumericError("fit_kde: auto bandwidth needs at least 2 samples");
  model.bandwidths.resize(samples.cols());
  for (int j = 0; j < samples.cols(); ++j) {
    const double mean = samples.col(j).mean();
    const double var = (samples.col(j).array() - mean).square().sum() / (n - 1);
    if (var <= 0.0)
      throw NumericError("fit_kde: zero variance in dimension " + std::to_string(j) +
                         "; auto bandwidth undefined");
    model.bandwidths[j] = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
  }
  return model;
}

double Conditional1D::pdf(double x) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < centers.size(); ++i) {
    const double u = (x - centers[i]) / bandwidth;
    total += weights[i] * kInvSqrt2Pi * std::exp(-0.5 * u * u) / bandwidth;
  }
  return total;
}

double Conditional1D::sample(Rng& rng) const {
  double target = rng.uniform();
  Eigen::Index pick = centers.size() - 1;
  for (Eigen::Index i = 0; i < centers.size(); ++i) {
    target -= weights[i];
    if (target <= 0.0) {
      pick = i;
      break;
    }
  }
  return centers[pick] + bandwidth * rng.normal();
}

Conditional1D conditional_density(const KdeModel& model, double t_s) {
  if (model.dims() != 2)
    throw ConfigError("conditional_density: model must be over (P, t)");
  const double h_t = model.bandwidths[1];
  Vec raw(model.n());
  for (int i = 0; i < model.n(); ++i) {
    const double u = (t_s - model.samples(i, 1)) / h_t;
    raw[i] = std::exp(-0.5 * u * u);
  }
  const double marginal = raw.sum() * kInvSqrt2Pi / (model.n() * h_t);
  if (marginal < 1e-12)
    throw DataError("conditional_density: slot has no support (f(t) < 1e-12)");
  Conditional1D cond;
  cond.centers = model.samples.col(0);
  cond.weights = raw / raw.sum();
  cond.bandwidth = model.bandwidths[0];
  return cond;
}

}  // namespace gridforge::loadsynth

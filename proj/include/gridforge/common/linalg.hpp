// Dense-type aliases and small expression-friendly numeric helpers.
// Eigen is the only math dependency of the project.
#pragma once

#include <Eigen/Dense>

namespace gridforge {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Arr = Eigen::ArrayXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Column-wise softmax, numerically stabilised by the per-column max.
template <typename Derived>
Mat softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  Mat out = logits;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    auto col = out.col(c).array();
    col -= col.maxCoeff();
    col = col.exp();
    col /= col.sum();
  }
  return out;
}

template <typename Derived>
double logsumexp(const Eigen::MatrixBase<Derived>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// Backprop through y = softmax(a): given dL/dy, returns dL/da.
template <typename DerivedY, typename DerivedG>
Vec softmax_backward(const Eigen::MatrixBase<DerivedY>& y,
                     const Eigen::MatrixBase<DerivedG>& grad_y) {
  const double dot = y.dot(grad_y);
  return (y.array() * (grad_y.array() - dot)).matrix();
}

}  // namespace gridforge

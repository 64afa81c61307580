// Primal-dual interior-point solver for second-order cone programs in the
// standard form
//     min c'x   s.t.  A x = b,   G x + s = h,   s in K,
// where K is a nonnegative orthant times a product of second-order cones.
// Nesterov-Todd scaling, Mehrotra predictor-corrector, sparse LDL^T KKT
// solves with static regularization and iterative refinement.
#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "gridforge/common/linalg.hpp"

namespace gridforge::placement {

using SpMat = Eigen::SparseMatrix<double>;

struct ConeSpec {
  int lp_dim = 0;
  std::vector<int> soc_dims;

  int total() const {
    int t = lp_dim;
    for (int d : soc_dims) t += d;
    return t;
  }
  // Barrier degree: one per LP coordinate, one per cone.
  int degree() const { return lp_dim + static_cast<int>(soc_dims.size()); }
};

struct ConicProgram {
  Vec c;
  SpMat a;  // n_eq x n
  Vec b;
  SpMat g;  // n_cone x n
  Vec h;
  ConeSpec cones;

  int n_vars() const { return static_cast<int>(c.size()); }
  int n_eq() const { return static_cast<int>(b.size()); }
  int n_cone() const { return static_cast<int>(h.size()); }
};

enum class IpmStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations };

struct IpmOptions {
  int max_iterations = 120;
  double feas_tol = 1e-8;
  double rel_gap_tol = 1e-7;
  double abs_gap_tol = 1e-12;
  double static_reg = 1e-10;
};

struct IpmResult {
  IpmStatus status = IpmStatus::MaxIterations;
  Vec x, y, z, s;
  double objective = 0.0;
  double gap = 0.0;
  double rel_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

IpmResult solve_conic(const ConicProgram& prog, const IpmOptions& opts = {});

}  // namespace gridforge::placement

#include "gridforge/assignment/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace gridforge::assignment {

LpProblem lp_from_milp(const MilpInstance& instance) {
  const int n = instance.n_vars;
  const int m = static_cast<int>(instance.rows.size());
  LpProblem lp;
  lp.n_struct = n;
  lp.columns = Mat::Zero(m, n + m);
  lp.cost = Vec::Zero(n + m);
  lp.cost.head(n) = instance.objective;
  lp.rhs = Vec::Zero(m);
  lp.lower = Vec::Zero(n + m);
  lp.upper = Vec::Zero(n + m);
  lp.lower.head(n).setZero();
  lp.upper.head(n).setOnes();
  for (int r = 0; r < m; ++r) {
    const auto& row = instance.rows[r];
    for (const auto& [j, coeff] : row.coeffs) lp.columns(r, j) += coeff;
    lp.columns(r, n + r) = 1.0;
    lp.rhs[r] = row.rhs;
    switch (row.sense) {
      case RowSense::LE:
        lp.lower[n + r] = 0.0;
        lp.upper[n + r] = kInf;
        break;
      case RowSense::EQ:
        lp.lower[n + r] = 0.0;
        lp.upper[n + r] = 0.0;
        break;
      case RowSense::GE:
        lp.lower[n + r] = -kInf;
        lp.upper[n + r] = 0.0;
        break;
    }
  }
  return lp;
}

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-9;

struct SimplexState {
  std::vector<int> basis;
  std::vector<bool> is_basic;
  std::vector<bool> at_upper;  // resting bound of nonbasic columns
  Mat b_inv;
};

void refactor(const LpProblem& lp, SimplexState& state) {
  const int m = lp.n_rows();
  Mat basis_cols(m, m);
  for (int i = 0; i < m; ++i) basis_cols.col(i) = lp.columns.col(state.basis[i]);
  Eigen::FullPivLU<Mat> lu(basis_cols);
  if (!lu.isInvertible()) throw SolveError("simplex: singular basis");
  state.b_inv = lu.inverse();
}

}  // namespace

LpResult solve_lp(const LpProblem& lp, const std::vector<int>* basis_hint,
                  const Vec* lower_override, const Vec* upper_override) {
  const int m = lp.n_rows();
  const int n_cols = lp.n_cols();
  auto lo = [&](int j) {
    return (lower_override && j < lp.n_struct) ? (*lower_override)[j] : lp.lower[j];
  };
  auto up = [&](int j) {
    return (upper_override && j < lp.n_struct) ? (*upper_override)[j] : lp.upper[j];
  };

  SimplexState state;
  state.is_basic.assign(n_cols, false);
  state.at_upper.assign(n_cols, false);

  bool cold = true;
  if (basis_hint && static_cast<int>(basis_hint->size()) == m) {
    state.basis = *basis_hint;
    for (int j : state.basis) state.is_basic[j] = true;
    try {
      refactor(lp, state);
      cold = false;
    } catch (const SolveError&) {
      state.is_basic.assign(n_cols, false);
      cold = true;
    }
  }
  if (cold) {
    state.basis.resize(m);
    for (int r = 0; r < m; ++r) {
      state.basis[r] = lp.n_struct + r;
      state.is_basic[lp.n_struct + r] = true;
    }
    state.b_inv = Mat::Identity(m, m);
  }

  // Dual-feasible resting bounds for the nonbasic columns.
  {
    Vec c_b(m);
    for (int i = 0; i < m; ++i) c_b[i] = lp.cost[state.basis[i]];
    Vec y = state.b_inv.transpose() * c_b;
    for (int j = 0; j < n_cols; ++j) {
      if (state.is_basic[j]) continue;
      const double d = lp.cost[j] - y.dot(lp.columns.col(j));
      const bool lower_finite = std::isfinite(lo(j));
      const bool upper_finite = std::isfinite(up(j));
      state.at_upper[j] = (lower_finite && upper_finite) ? (d < 0.0) : !lower_finite;
      if (lo(j) == up(j)) state.at_upper[j] = false;
    }
  }

  LpResult result;
  const int max_iter = 20000 + 50 * m;
  int since_refactor = 0;

  for (int iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter;

    // Nonbasic values and basic solve.
    Vec x = Vec::Zero(n_cols);
    for (int j = 0; j < n_cols; ++j) {
      if (state.is_basic[j]) continue;
      x[j] = state.at_upper[j] ? up(j) : lo(j);
      if (!std::isfinite(x[j])) throw SolveError("simplex: nonbasic at infinite bound");
    }
    Vec r = lp.rhs - lp.columns * x;
    Vec x_b = state.b_inv * r;
    for (int i = 0; i < m; ++i) x[state.basis[i]] = x_b[i];

    // Most-violated basic variable leaves.
    int leave_pos = -1;
    double worst = kFeasTol;
    bool violated_below = false;
    for (int i = 0; i < m; ++i) {
      const int j = state.basis[i];
      const double below = lo(j) - x_b[i];
      const double above = x_b[i] - up(j);
      if (below > worst) {
        worst = below;
        leave_pos = i;
        violated_below = true;
      }
      if (above > worst) {
        worst = above;
        leave_pos = i;
        violated_below = false;
      }
    }
    if (leave_pos < 0) {
      result.status = LpStatus::Optimal;
      result.x = x.head(lp.n_struct);
      result.objective = lp.cost.dot(x);
      result.basis = state.basis;
      return result;
    }

    // Reduced costs and the pivot row.
    Vec c_b(m);
    for (int i = 0; i < m; ++i) c_b[i] = lp.cost[state.basis[i]];
    Vec y = state.b_inv.transpose() * c_b;
    Vec rho = state.b_inv.row(leave_pos).transpose();

    int enter = -1;
    double best_ratio = kInf;
    double best_alpha = 0.0;
    for (int j = 0; j < n_cols; ++j) {
      if (state.is_basic[j]) continue;
      if (lo(j) == up(j)) continue;  // fixed, cannot move
      const double alpha = rho.dot(lp.columns.col(j));
      if (std::abs(alpha) < kPivotTol) continue;
      const double sigma = state.at_upper[j] ? -1.0 : 1.0;
      // The leaving variable must move toward its violated bound.
      const double effect = -alpha * sigma;  // d x_b[leave] per unit step
      if (violated_below ? effect <= 0.0 : effect >= 0.0) continue;
      const double d = lp.cost[j] - y.dot(lp.columns.col(j));
      const double ratio = std::abs(d) / std::abs(alpha);
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && std::abs(alpha) > std::abs(best_alpha))) {
        best_ratio = ratio;
        best_alpha = alpha;
        enter = j;
      }
    }
    if (enter < 0) {
      result.status = LpStatus::PrimalInfeasible;
      result.basis = state.basis;
      return result;
    }

    // Basis exchange and product-form inverse update.
    Vec w = state.b_inv * lp.columns.col(enter);
    const double pivot = w[leave_pos];
    if (std::abs(pivot) < kPivotTol) throw SolveError("simplex: vanishing pivot");
    const int leave_col = state.basis[leave_pos];
    state.is_basic[leave_col] = false;
    state.at_upper[leave_col] = !violated_below;
    if (lo(leave_col) == up(leave_col)) state.at_upper[leave_col] = false;
    state.basis[leave_pos] = enter;
    state.is_basic[enter] = true;

    if (++since_refactor >= 64) {
      refactor(lp, state);
      since_refactor = 0;
    } else {
      state.b_inv.row(leave_pos) /= pivot;
      for (int i = 0; i < m; ++i) {
        if (i == leave_pos) continue;
        state.b_inv.row(i) -= w[i] * state.b_inv.row(leave_pos);
      }
    }
  }
  result.status = LpStatus::IterationLimit;
  return result;
}

}  // namespace gridforge::assignment

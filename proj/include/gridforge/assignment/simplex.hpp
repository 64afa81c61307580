// Bounded-variable LP solver built around the dual simplex method.
//
// Rows become equalities with a slack column whose bounds encode the sense;
// the all-slack basis with cost-sign resting bounds is dual feasible, so the
// dual simplex both solves from scratch and re-optimizes after the bound
// tightenings branch-and-bound performs.
#pragma once

#include <limits>
#include <vector>

#include "gridforge/common/linalg.hpp"
#include "gridforge/assignment/problem.hpp"

namespace gridforge::assignment {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpProblem {
  Mat columns;   // m x N: structural columns then the identity slack block
  Vec cost;      // N (zero on slacks)
  Vec rhs;       // m
  Vec lower;     // N
  Vec upper;     // N
  int n_struct = 0;

  int n_rows() const { return static_cast<int>(rhs.size()); }
  int n_cols() const { return static_cast<int>(cost.size()); }
};

// Structural variables are binaries relaxed to [0, 1]; `lower`/`upper`
// overrides (sized n_vars) tighten them for branch-and-bound nodes.
LpProblem lp_from_milp(const MilpInstance& instance);

enum class LpStatus { Optimal, PrimalInfeasible, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Vec x;             // structural variable values
  double objective = 0.0;
  std::vector<int> basis;  // for warm starts
  int iterations = 0;
};

// Solves min c'x with the dual simplex. `basis_hint` (from a previous solve
// of the same problem with different bounds) warm-starts the search.
// `lower_override`/`upper_override`, when given, replace the bounds of the
// structural variables (length n_struct) without copying the problem.
LpResult solve_lp(const LpProblem& lp, const std::vector<int>* basis_hint = nullptr,
                  const Vec* lower_override = nullptr, const Vec* upper_override = nullptr);

}  // namespace gridforge::assignment

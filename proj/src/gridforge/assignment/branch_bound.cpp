#include "gridforge/assignment/branch_bound.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

namespace gridforge::assignment {

double evaluate_objective(const MilpInstance& instance, const Vec& x01) {
  double total = instance.objective_constant;
  for (int j = 0; j < instance.n_vars; ++j)
    if (x01[j] != 0.0) total += instance.objective[j];
  return total;
}

namespace {

constexpr double kIntTol = 1e-7;

struct Node {
  double bound = 0.0;
  long long id = 0;
  std::shared_ptr<const Vec> lower;
  std::shared_ptr<const Vec> upper;
  std::shared_ptr<const std::vector<int>> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-bound first
    return a.id > b.id;                                // FIFO tie break
  }
};

bool feasible_for_rounding(const MilpInstance& instance, const Vec& x01, double tol) {
  for (const auto& row : instance.rows) {
    double lhs = 0.0;
    for (const auto& [j, coeff] : row.coeffs) lhs += coeff * x01[j];
    switch (row.sense) {
      case RowSense::LE:
        if (lhs > row.rhs + tol) return false;
        break;
      case RowSense::EQ:
        if (std::abs(lhs - row.rhs) > tol) return false;
        break;
      case RowSense::GE:
        if (lhs < row.rhs - tol) return false;
        break;
    }
  }
  return true;
}

}  // namespace

MilpSolution solve_milp(const MilpInstance& instance,
                        std::optional<std::chrono::duration<double>> time_limit) {
  const auto start_time = std::chrono::steady_clock::now();
  const LpProblem lp = lp_from_milp(instance);
  const int n = instance.n_vars;

  MilpSolution best;
  best.status = MilpStatus::Infeasible;
  bool have_incumbent = false;
  double incumbent = kInf;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long long next_id = 0;

  auto root_lower = std::make_shared<Vec>(Vec::Zero(n));
  auto root_upper = std::make_shared<Vec>(Vec::Ones(n));
  {
    LpResult root = solve_lp(lp, nullptr, root_lower.get(), root_upper.get());
    if (root.status == LpStatus::PrimalInfeasible) return best;
    if (root.status != LpStatus::Optimal)
      throw SolveError("solve_milp: root LP hit the iteration limit");
    Node node;
    node.bound = root.objective;
    node.id = next_id++;
    node.lower = root_lower;
    node.upper = root_upper;
    node.basis = std::make_shared<std::vector<int>>(root.basis);
    open.push(node);
  }

  while (!open.empty()) {
    if (time_limit) {
      const auto elapsed = std::chrono::steady_clock::now() - start_time;
      if (elapsed > *time_limit) {
        best.status = have_incumbent ? MilpStatus::TimeLimit : MilpStatus::Infeasible;
        best.lower_bound = open.top().bound + instance.objective_constant;
        best.gap = have_incumbent ? best.objective - best.lower_bound : kInf;
        return best;
      }
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent &&
        node.bound + instance.objective_constant >= incumbent - 1e-9 * (1.0 + std::abs(incumbent)))
      continue;

    LpResult relax = solve_lp(lp, node.basis.get(), node.lower.get(), node.upper.get());
    ++best.nodes_explored;
    if (relax.status == LpStatus::PrimalInfeasible) continue;
    if (relax.status != LpStatus::Optimal)
      throw SolveError("solve_milp: node LP hit the iteration limit");
    if (have_incumbent &&
        relax.objective + instance.objective_constant >=
            incumbent - 1e-9 * (1.0 + std::abs(incumbent)))
      continue;

    // Most-fractional branching variable (closest to one half).
    int branch_var = -1;
    double best_frac_score = -1.0;
    for (int j = 0; j < n; ++j) {
      const double v = relax.x[j];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > kIntTol && frac > best_frac_score + 1e-12) {
        best_frac_score = frac;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      // Integral vertex: round exactly and re-verify before accepting.
      Vec x01(n);
      for (int j = 0; j < n; ++j) x01[j] = relax.x[j] > 0.5 ? 1.0 : 0.0;
      if (!feasible_for_rounding(instance, x01, 1e-6)) continue;
      const double value = evaluate_objective(instance, x01);
      if (!have_incumbent || value < incumbent) {
        have_incumbent = true;
        incumbent = value;
        best.status = MilpStatus::Optimal;
        best.x = x01;
        best.objective = value;
      }
      continue;
    }

    for (int side = 0; side < 2; ++side) {
      auto child_lower = std::make_shared<Vec>(*node.lower);
      auto child_upper = std::make_shared<Vec>(*node.upper);
      if (side == 0)
        (*child_upper)[branch_var] = 0.0;
      else
        (*child_lower)[branch_var] = 1.0;
      Node child;
      child.bound = relax.objective;  // parent bound; tightened when solved
      child.id = next_id++;
      child.lower = child_lower;
      child.upper = child_upper;
      child.basis = std::make_shared<std::vector<int>>(relax.basis);
      open.push(child);
    }
  }

  if (have_incumbent) {
    best.status = MilpStatus::Optimal;
    best.lower_bound = best.objective;
    best.gap = 0.0;
  }
  return best;
}

}  // namespace gridforge::assignment

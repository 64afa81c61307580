// Branch-and-bound over binary variables with dual-simplex LP bounding.
#pragma once

#include <chrono>
#include <optional>

#include "gridforge/assignment/simplex.hpp"

namespace gridforge::assignment {

enum class MilpStatus { Optimal, Infeasible, TimeLimit };

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  Vec x;                  // binary vector (exact 0/1 values)
  double objective = 0.0; // includes the instance's objective constant
  double lower_bound = 0.0;
  double gap = 0.0;       // |objective - lower_bound| when the limit was hit
  long long nodes_explored = 0;
};

// Exact objective value for a rounded binary vector, evaluated in variable
// order so that callers (and oracles) can reproduce it bit for bit.
double evaluate_objective(const MilpInstance& instance, const Vec& x01);

// Best-first search, most-fractional branching, warm-started dual simplex
// bounding. Returns a provably optimal solution, infeasibility, or the best
// incumbent with a gap report when the time limit strikes.
MilpSolution solve_milp(const MilpInstance& instance,
                        std::optional<std::chrono::duration<double>> time_limit = std::nullopt);

}  // namespace gridforge::assignment

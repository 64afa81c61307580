// Component siting and sizing by support enumeration over conic solves
// (branch-and-bound on the siting binaries for larger component budgets).
#pragma once

#include <filesystem>
#include <optional>

#include "gridforge/placement/socp.hpp"

namespace gridforge::placement {

struct PlacementCase {
  std::vector<int> support;
  ConicState state;
  double loss_kw = 0.0;
  bool feasible = false;
};

struct PlacementSolution {
  PlacementCase best;
  double baseline_loss_kw = 0.0;  // empty-support losses
  std::vector<std::pair<int, double>> loss_by_budget;  // N_G -> optimal loss kW
};

// Loss-minimizing solve for one fixed support; nullopt when infeasible.
std::optional<PlacementCase> solve_support(const PlacementProblem& problem,
                                           const std::set<int>& support);

// Globally optimal support of size <= N_G. Budgets up to 3 are enumerated
// exhaustively (all subsets of candidate nodes, fanned out over `jobs`
// workers); larger budgets fall back to branch-and-bound with the continuous
// siting relaxation as the bound. Ties break toward the lexicographically
// smaller support.
PlacementSolution place_components(const PlacementProblem& problem, int jobs = 1);

std::string placement_report_json(const PlacementProblem& problem,
                                  const PlacementSolution& solution);
void save_loss_by_budget_csv(const PlacementSolution& solution,
                             const std::filesystem::path& path);

}  // namespace gridforge::placement

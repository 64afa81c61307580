#include "gridforge/placement/place.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gridforge/common/io_util.hpp"

namespace gridforge::placement {

std::optional<PlacementCase> solve_support(const PlacementProblem& problem,
                                           const std::set<int>& support) {
  BuiltSocp built = build_socp(problem, support);
  IpmResult result = solve_conic(built.program);
  if (result.status == IpmStatus::PrimalInfeasible) return std::nullopt;
  if (result.status != IpmStatus::Optimal)
    throw SolveError("placement: conic solve did not converge (support size " +
                     std::to_string(support.size()) + ")");
  PlacementCase pc;
  pc.support.assign(support.begin(), support.end());
  pc.state = state_from_solution(problem, built, result.x);
  pc.loss_kw = pc.state.loss_pu * problem.s_base_kw;
  pc.feasible = true;
  return pc;
}

namespace {

std::vector<int> candidate_nodes(const PlacementProblem& problem) {
  std::vector<int> nodes;
  for (int j = 1; j < problem.n_nodes; ++j)
    if (problem.pg_max[j] > 0.0 || problem.qg_max[j] > 0.0) nodes.push_back(j);
  return nodes;
}

bool better(const PlacementCase& a, const PlacementCase& b) {
  if (!b.feasible) return a.feasible;
  if (!a.feasible) return false;
  if (std::abs(a.loss_kw - b.loss_kw) > 1e-12 * std::max(1.0, std::abs(b.loss_kw)))
    return a.loss_kw < b.loss_kw;
  return a.support < b.support;  // lexicographic tie break
}

// All supports of exactly size `size` over `nodes`.
void enumerate_supports(const std::vector<int>& nodes, int size,
                        std::vector<std::set<int>>& out) {
  std::vector<int> pick(size);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == size) {
      out.emplace_back(pick.begin(), pick.end());
      return;
    }
    for (int i = start; i < static_cast<int>(nodes.size()); ++i) {
      pick[depth] = nodes[i];
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

PlacementCase best_of_supports(const PlacementProblem& problem,
                               const std::vector<std::set<int>>& supports, int jobs) {
  std::vector<PlacementCase> results(supports.size());
  std::vector<bool> ok(supports.size(), false);
  const int workers = std::max(1, jobs);
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= supports.size()) return;
      auto solved = solve_support(problem, supports[i]);
      if (solved) {
        results[i] = std::move(*solved);
        ok[i] = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  PlacementCase best;
  for (size_t i = 0; i < supports.size(); ++i)
    if (ok[i] && better(results[i], best)) best = results[i];
  return best;
}

// Branch-and-bound over siting binaries with the continuous relaxation as
// bound: nodes outside `允fixed sets` get u in [0,1] via scaled boxes.
struct BnbNode {
  std::set<int> fixed_one;
  std::set<int> fixed_zero;
  double bound = 0.0;
};

constexpr double kInfLoss = std::numeric_limits<double>::infinity();

// Relaxation: components allowed everywhere not fixed to zero. Dropping the
// count cap only enlarges the feasible set, so this is a valid lower bound.
double relaxation_bound(const PlacementProblem& problem, const BnbNode& node,
                        const std::vector<int>& candidates) {
  std::set<int> allowed(node.fixed_one);
  for (int j : candidates)
    if (!node.fixed_zero.count(j)) allowed.insert(j);
  auto solved = solve_support(problem, allowed);
  return solved ? solved->loss_kw : kInfLoss;
}

}  // namespace

PlacementSolution place_components(const PlacementProblem& problem, int jobs) {
  problem.check();
  PlacementSolution solution;
  auto baseline = solve_support(problem, {});
  if (!baseline)
    throw SolveError("placement: baseline (no components) is infeasible");
  solution.baseline_loss_kw = baseline->loss_kw;

  const auto candidates = candidate_nodes(problem);
  const int budget = problem.max_components;

  if (budget <= 3) {
    PlacementCase best = *baseline;
    solution.loss_by_budget.push_back({0, baseline->loss_kw});
    for (int size = 1; size <= budget; ++size) {
      std::vector<std::set<int>> supports;
      enumerate_supports(candidates, size, supports);
      PlacementCase level = best_of_supports(problem, supports, jobs);
      if (level.feasible && better(level, best)) best = level;
      solution.loss_by_budget.push_back({size, best.feasible ? best.loss_kw : kInfLoss});
    }
    if (!best.feasible) throw SolveError("placement: every support infeasible");
    solution.best = best;
    return solution;
  }

  // Branch-and-bound fallback for larger budgets.
  PlacementCase incumbent = *baseline;
  solution.loss_by_budget.push_back({0, baseline->loss_kw});
  std::vector<BnbNode> stack{{{}, {}, 0.0}};
  while (!stack.empty()) {
    BnbNode node = stack.back();
    stack.pop_back();
    if (static_cast<int>(node.fixed_one.size()) > budget) continue;
    const double bound = relaxation_bound(problem, node, candidates);
    if (!(bound < incumbent.loss_kw - 1e-9)) continue;
    // Feasible candidate: exactly the fixed-one support.
    if (auto exact = solve_support(problem, node.fixed_one);
        exact && better(*exact, incumbent))
      incumbent = *exact;
    // Branch on the first undecided candidate.
    int branch = -1;
    for (int j : candidates)
      if (!node.fixed_one.count(j) && !node.fixed_zero.count(j)) {
        branch = j;
        break;
      }
    if (branch < 0) continue;
    BnbNode with = node;
    with.fixed_one.insert(branch);
    BnbNode without = node;
    without.fixed_zero.insert(branch);
    if (static_cast<int>(with.fixed_one.size()) <= budget) stack.push_back(with);
    stack.push_back(without);
  }
  solution.best = incumbent;
  solution.loss_by_budget.push_back({budget, incumbent.loss_kw});
  return solution;
}

std::string placement_report_json(const PlacementProblem& problem,
                                  const PlacementSolution& solution) {
  nlohmann::json doc;
  doc["baseline_loss_kw"] = solution.baseline_loss_kw;
  nlohmann::json best;
  best["support"] = solution.best.support;
  nlohmann::json sizes = nlohmann::json::array();
  for (int j : solution.best.support)
    sizes.push_back({{"node", j},
                     {"p_kw", solution.best.state.p_gen[j] * problem.s_base_kw},
                     {"q_kvar", solution.best.state.q_gen[j] * problem.s_base_kw}});
  best["sizes"] = sizes;
  best["loss_kw"] = solution.best.loss_kw;
  doc["best"] = best;
  nlohmann::json sweep = nlohmann::json::array();
  for (auto [ng, loss] : solution.loss_by_budget)
    sweep.push_back({{"n_g", ng}, {"loss_kw", loss}});
  doc["loss_by_budget"] = sweep;
  return doc.dump(2) + "\n";
}

void save_loss_by_budget_csv(const PlacementSolution& solution,
                             const std::filesystem::path& path) {
  std::ostringstream out;
  out << "n_g,loss_kw\n";
  for (auto [ng, loss] : solution.loss_by_budget)
    out << ng << ',' << format_double(loss) << '\n';
  write_text_file(path, out.str());
}

}  // namespace gridforge::placement

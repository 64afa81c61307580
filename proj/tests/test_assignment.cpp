#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridforge/assignment/branch_bound.hpp"
#include "gridforge/common/io_util.hpp"
#include "gridforge/common/rng.hpp"
#include "gridforge/netmodel/indices.hpp"
#include "test_util.hpp"

using namespace gridforge;
using namespace gridforge::assignment;
using gftest::make_graph;

namespace {

netmodel::NetworkGraph random_tree(int n, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.push_back({rng.uniform_int(v), v});
  return make_graph(n, edges);
}

AssignmentProblem random_problem(int n_nodes, int n_single, int n_three, Rng& rng,
                                 double delta_set = 0.6) {
  AssignmentProblem prob;
  prob.candidate = random_tree(n_nodes, rng);
  prob.q = Mat(prob.candidate.n_edges(), 3);
  for (int e = 0; e < prob.q.rows(); ++e)
    for (int p = 0; p < 3; ++p) prob.q(e, p) = rng.uniform();
  for (int k = 0; k < n_single; ++k)
    prob.single_loads.push_back({1 + rng.uniform_int(n_nodes - 1), 1.0 + 9.0 * rng.uniform()});
  for (int j = 0; j < n_three; ++j)
    prob.three_loads.push_back({1 + rng.uniform_int(n_nodes - 1), 5.0 + 20.0 * rng.uniform()});
  prob.delta_set = delta_set;
  return prob;
}

// Independent brute force: enumerate every per-load phase choice (3^N_L),
// derive node/edge phases bottom-up as the OR of demands, reject choices that
// break the {0,1,3} cardinality rule or the unbalance cap, and score the
// original quadratic objective.
struct BruteResult {
  bool feasible = false;
  double quadratic = kInf;
  Vec x;  // full binary vector in instance layout
};

BruteResult brute_force(const AssignmentProblem& prob, const BuiltAssignment& built) {
  const auto& vars = built.vars;
  const int n_l = vars.n_single;
  const auto parent = netmodel::tree_parents(prob.candidate, 0);
  std::vector<std::vector<int>> children(vars.n_nodes);
  for (int v = 1; v < vars.n_nodes; ++v) children[parent[v]].push_back(v);
  // Process nodes deepest-first.
  std::vector<int> order;
  order.push_back(0);
  for (size_t i = 0; i < order.size(); ++i)
    for (int c : children[order[i]]) order.push_back(c);

  double p_total = 0.0;
  for (const auto& l : prob.single_loads) p_total += l.p_kw;
  for (const auto& l : prob.three_loads) p_total += l.p_kw;

  BruteResult best;
  std::vector<int> choice(n_l, 0);
  long long combos = 1;
  for (int k = 0; k < n_l; ++k) combos *= 3;
  for (long long code = 0; code < combos; ++code) {
    long long rest = code;
    for (int k = 0; k < n_l; ++k) {
      choice[k] = rest % 3;
      rest /= 3;
    }
    // Node masks bottom-up.
    std::vector<int> mask(vars.n_nodes, 0);
    for (int k = 0; k < n_l; ++k) mask[prob.single_loads[k].host_node] |= 1 << choice[k];
    for (const auto& l : prob.three_loads) mask[l.host_node] |= 7;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (*it != 0)
        mask[parent[*it]] |= mask[*it];
    mask[0] = 7;
    bool ok = true;
    for (int v = 0; v < vars.n_nodes && ok; ++v) {
      const int bits = __builtin_popcount(mask[v]);
      if (bits == 2) ok = false;
    }
    if (!ok) continue;
    // Unbalance cap.
    double per_phase[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < n_l; ++k) per_phase[choice[k]] += prob.single_loads[k].p_kw;
    for (const auto& l : prob.three_loads)
      for (int p = 0; p < 3; ++p) per_phase[p] += l.p_kw / 3.0;
    if (p_total > 0.0) {
      const double gap = std::max({std::abs(per_phase[0] - per_phase[1]),
                                   std::abs(per_phase[0] - per_phase[2]),
                                   std::abs(per_phase[1] - per_phase[2])});
      if (gap / p_total > prob.delta_set + 1e-12) continue;
    }
    // Edge labels and quadratic objective.
    double quad = 0.0;
    for (int e = 0; e < vars.n_edges; ++e) {
      const int child = built.edge_child[e];
      for (int p = 0; p < 3; ++p) {
        const double u = (mask[child] >> p) & 1;
        const double d = prob.q(e, p) - u;
        quad += d * d;
      }
    }
    if (quad < best.quadratic) {
      best.feasible = true;
      best.quadratic = quad;
      best.x = Vec::Zero(vars.total());
      for (int k = 0; k < n_l; ++k) best.x[vars.u_single(k, choice[k])] = 1.0;
      for (int j = 0; j < vars.n_three; ++j)
        for (int p = 0; p < 3; ++p) best.x[vars.u_three(j, p)] = 1.0;
      for (int v = 0; v < vars.n_nodes; ++v) {
        for (int p = 0; p < 3; ++p)
          best.x[vars.u_node(v, p)] = (mask[v] >> p) & 1;
        const int bits = __builtin_popcount(mask[v]);
        best.x[vars.z_energized(v)] = bits > 0 ? 1.0 : 0.0;
        best.x[vars.b_three_node(v)] = bits == 3 ? 1.0 : 0.0;
      }
      for (int e = 0; e < vars.n_edges; ++e)
        for (int p = 0; p < 3; ++p)
          best.x[vars.u_edge(e, p)] = (mask[built.edge_child[e]] >> p) & 1;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("compute_unbalance") {
  // Per-phase head injections 614.04 / 588.84 / 642.04 kW: gap 53.20 over
  // total 1844.92 is about 2.9%.
  CHECK(compute_unbalance(614.04, 588.84, 642.04) ==
        doctest::Approx(53.20 / 1844.92).epsilon(1e-12));
  CHECK(compute_unbalance(614.04, 588.84, 642.04) == doctest::Approx(0.0288).epsilon(2e-3));
  CHECK(compute_unbalance(5.0, 5.0, 5.0) == 0.0);
  CHECK(compute_unbalance(1.0, 0.0, 0.0) == 1.0);
  CHECK_THROWS_AS(compute_unbalance(0.0, 0.0, 0.0), DataError);
  CHECK_THROWS_AS(compute_unbalance(-1.0, 1.0, 1.0), InvalidInputError);
}

TEST_CASE("linearized objective equals the quadratic exactly") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto prob = random_problem(5, 3, 1, rng);
    auto built = build_assignment(prob);
    // Random edge labelling; other variables do not enter the objective.
    Vec x = Vec::Zero(built.vars.total());
    Mat u_edge = Mat::Zero(built.vars.n_edges, 3);
    for (int e = 0; e < built.vars.n_edges; ++e)
      for (int p = 0; p < 3; ++p) {
        const double bit = rng.uniform() < 0.5 ? 1.0 : 0.0;
        u_edge(e, p) = bit;
        x[built.vars.u_edge(e, p)] = bit;
      }
    const double linear = evaluate_objective(built.instance, x);
    const double quad = quadratic_objective(prob, u_edge);
    CHECK(std::abs(linear - quad) < 1e-12);
  }
}

TEST_CASE("two-node instance: dominant score wins") {
  AssignmentProblem prob;
  prob.candidate = make_graph(2, {{0, 1}});
  prob.q = Mat(1, 3);
  prob.q << 0.9, 0.1, 0.1;
  prob.single_loads.push_back({1, 1.0});
  prob.delta_set = 1.0;
  auto built = build_assignment(prob);
  auto milp = solve_milp(built.instance);
  REQUIRE(milp.status == MilpStatus::Optimal);
  auto sol = solution_from_binaries(prob, built.vars, milp.x, milp.objective);
  CHECK(sol.u_single(0, 0) == 1.0);
  CHECK(sol.u_edge(0, 0) == 1.0);
  CHECK(sol.u_edge(0, 1) == 0.0);
  CHECK(sol.u_edge(0, 2) == 0.0);
  // (0.9-1)^2 + 0.1^2 + 0.1^2 = 0.03.
  CHECK(milp.objective == doctest::Approx(0.03).epsilon(1e-9));
}

TEST_CASE("three equal loads spread across phases under a tight cap") {
  AssignmentProblem prob;
  prob.candidate = make_graph(2, {{0, 1}});
  prob.q = Mat(1, 3);
  prob.q << 0.8, 0.8, 0.8;
  for (int k = 0; k < 3; ++k) prob.single_loads.push_back({1, 10.0});
  prob.delta_set = 0.01;
  auto built = build_assignment(prob);
  auto milp = solve_milp(built.instance);
  REQUIRE(milp.status == MilpStatus::Optimal);
  auto sol = solution_from_binaries(prob, built.vars, milp.x, milp.objective);
  CHECK(sol.delta == 0.0);
  for (int p = 0; p < 3; ++p) CHECK(sol.phase_totals_kw[p] == doctest::Approx(10.0));
  CHECK(check_solution(prob, sol).empty());
}

TEST_CASE("constraint row count follows the closed-form tally") {
  Rng rng(17);
  auto prob = random_problem(4, 2, 1, rng);
  auto built = build_assignment(prob);
  const int n_l = static_cast<int>(prob.single_loads.size());
  const int n_i = static_cast<int>(prob.three_loads.size());
  const int n_n = prob.candidate.n_nodes();
  const int n_e = prob.candidate.n_edges();
  // Independently derived tally: Eq.10 rows + 6 per edge + OR-link block
  // (three-phase fixes, root fix, per-node lower links and caps, cardinality
  // pairs) + 6 unbalance rows.
  int hosted_single_links = 0;
  for (const auto& l : prob.single_loads)
    if (l.host_node != 0) ++hosted_single_links;
  const int or_links = 6 * n_i + 3 + 3 * (n_n - 1) + 3 * hosted_single_links + 2 * n_n;
  const int expected = n_l + 6 * n_e + or_links + 6;
  CHECK(static_cast<int>(built.instance.rows.size()) == expected);
}

TEST_CASE("solver equals the enumeration oracle on 100 random instances") {
  Rng rng(29);
  int feasible_count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_nodes = 3 + rng.uniform_int(3);
    const int n_single = 1 + rng.uniform_int(4);  // at most 3^4 = 81 combos
    const int n_three = rng.uniform_int(2);
    const double delta_set = 0.3 + 0.5 * rng.uniform();
    auto prob = random_problem(n_nodes, n_single, n_three, rng, delta_set);
    auto built = build_assignment(prob);
    auto oracle = brute_force(prob, built);
    auto milp = solve_milp(built.instance);
    if (!oracle.feasible) {
      CHECK(milp.status == MilpStatus::Infeasible);
      continue;
    }
    ++feasible_count;
    REQUIRE(milp.status == MilpStatus::Optimal);
    // Exact equality through the shared linear evaluation; quadratic identity
    // within 1e-12.
    CHECK(milp.objective == evaluate_objective(built.instance, oracle.x));
    auto sol = solution_from_binaries(prob, built.vars, milp.x, milp.objective);
    CHECK(std::abs(quadratic_objective(prob, sol.u_edge) - oracle.quadratic) < 1e-12);
    CHECK(check_solution(prob, sol).empty());
    CHECK(sol.delta <= prob.delta_set + 1e-9);
  }
  CHECK(feasible_count > 50);  // the family is mostly feasible
}

TEST_CASE("infeasible and degenerate instances") {
  MilpInstance inst;
  inst.n_vars = 1;
  inst.objective = Vec::Zero(1);
  inst.var_names = {"u"};
  inst.rows.push_back({{{0, 1.0}}, RowSense::EQ, 1.0, "fix1"});
  inst.rows.push_back({{{0, 1.0}}, RowSense::EQ, 0.0, "fix0"});
  CHECK(solve_milp(inst).status == MilpStatus::Infeasible);

  MilpInstance zero;
  zero.n_vars = 3;
  zero.objective = Vec::Zero(3);
  zero.var_names = {"a", "b", "c"};
  zero.rows.push_back({{{0, 1.0}, {1, 1.0}}, RowSense::LE, 1.0, "cap"});
  auto sol = solve_milp(zero);
  REQUIRE(sol.status == MilpStatus::Optimal);
  CHECK(sol.objective == 0.0);
}

TEST_CASE("apply_solution yields phase-consistent graphs on random instances") {
  Rng rng(71);
  int applied = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_nodes = 3 + rng.uniform_int(8);  // up to 10 nodes
    auto prob = random_problem(n_nodes, 3 + rng.uniform_int(3), rng.uniform_int(2), rng);
    auto built = build_assignment(prob);
    auto milp = solve_milp(built.instance);
    if (milp.status != MilpStatus::Optimal) continue;
    ++applied;
    auto sol = solution_from_binaries(prob, built.vars, milp.x, milp.objective);
    auto graph = apply_solution(prob, sol);
    CHECK(netmodel::validate_radial_phases(graph).empty());
    // Phase sets never grow moving away from the root.
    auto up = netmodel::upstream_edges(graph, 0);
    for (int v = 1; v < graph.n_nodes(); ++v) {
      const int e = up[v];
      REQUIRE(e >= 0);
    }
    // Three-phase hosts are tagged ABC.
    for (const auto& load : prob.three_loads)
      CHECK(graph.nodes[load.host_node].phase == netmodel::Phase::ABC);
  }
  CHECK(applied > 60);
}

TEST_CASE("build rejects malformed problems") {
  AssignmentProblem prob;
  prob.candidate = make_graph(3, {{0, 1}, {0, 2}});
  prob.q = Mat::Zero(2, 3);
  prob.single_loads.push_back({5, 1.0});  // host absent
  CHECK_THROWS_AS(build_assignment(prob), DataError);

  AssignmentProblem cyc;
  cyc.candidate = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  cyc.q = Mat::Zero(3, 3);
  CHECK_THROWS_AS(build_assignment(cyc), StructureError);
}

TEST_CASE("instance dump and solution json") {
  Rng rng(5);
  auto prob = random_problem(3, 1, 0, rng, 1.0);
  auto built = build_assignment(prob);
  auto path = std::filesystem::temp_directory_path() / "gf_milp_dump.txt";
  dump_milp(built.instance, path);
  auto text = read_text_file(path);
  CHECK(text.find("single-phase-choice") != std::string::npos);
  CHECK(text.find("unbalance") != std::string::npos);
  std::filesystem::remove(path);

  auto milp = solve_milp(built.instance);
  REQUIRE(milp.status == MilpStatus::Optimal);
  auto sol = solution_from_binaries(prob, built.vars, milp.x, milp.objective);
  auto json_text = solution_to_json(sol);
  CHECK(json_text.find("phase_totals_kw") != std::string::npos);
}

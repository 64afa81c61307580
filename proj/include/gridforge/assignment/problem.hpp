// Joint load-assignment / phase-correction program.
//
// Binary variables: per single-phase load, per three-phase load, per node and
// per edge, one for each phase A/B/C, plus two auxiliaries per node (an
// energized flag and a three-phase flag) that keep every chosen phase set
// representable as a single tag or ABC. The quadratic objective
// sum (Q - u)^2 linearizes exactly over binaries via u^2 = u.
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "gridforge/common/linalg.hpp"
#include "gridforge/netmodel/network.hpp"

namespace gridforge::assignment {

struct SinglePhaseLoad {
  int host_node = 0;
  double p_kw = 0.0;
};

struct ThreePhaseLoad {
  int host_node = 0;
  double p_kw = 0.0;
};

struct AssignmentProblem {
  netmodel::NetworkGraph candidate;  // tree rooted at node 0
  Mat q;                             // N_e x 3, rows aligned to candidate.edges
  std::vector<SinglePhaseLoad> single_loads;
  std::vector<ThreePhaseLoad> three_loads;
  double delta_set = 0.05;
};

enum class RowSense { LE, EQ, GE };

struct MilpRow {
  std::vector<std::pair<int, double>> coeffs;
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
  std::string tag;
};

struct MilpInstance {
  int n_vars = 0;  // all binary in [0, 1]
  Vec objective;
  double objective_constant = 0.0;
  std::vector<MilpRow> rows;
  std::vector<std::string> var_names;
};

// Variable layout of a built assignment instance.
struct AssignmentVars {
  int n_single = 0, n_three = 0, n_nodes = 0, n_edges = 0;
  int u_single(int k, int phase) const { return 3 * k + phase; }
  int u_three(int j, int phase) const { return 3 * n_single + 3 * j + phase; }
  int u_node(int node, int phase) const {
    return 3 * (n_single + n_three) + 3 * node + phase;
  }
  int u_edge(int edge, int phase) const {
    return 3 * (n_single + n_three + n_nodes) + 3 * edge + phase;
  }
  int b_three_node(int node) const {
    return 3 * (n_single + n_three + n_nodes + n_edges) + node;
  }
  int z_energized(int node) const {
    return 3 * (n_single + n_three + n_nodes + n_edges) + n_nodes + node;
  }
  int total() const {
    return 3 * (n_single + n_three + n_nodes + n_edges) + 2 * n_nodes;
  }
};

struct BuiltAssignment {
  MilpInstance instance;
  AssignmentVars vars;
  std::vector<int> edge_child;  // downstream endpoint of each edge under root 0
};

BuiltAssignment build_assignment(const AssignmentProblem& problem);

// Exact value of the quadratic objective sum (Q - u)^2 for a binary edge
// labelling (used by the linearization identity checks).
double quadratic_objective(const AssignmentProblem& problem, const Mat& u_edge);

struct AssignmentSolution {
  Mat u_single;  // N_L x 3
  Mat u_three;   // N_I x 3
  Mat u_node;    // N_n x 3
  Mat u_edge;    // N_e x 3
  double objective = 0.0;
  std::array<double, 3> phase_totals_kw{{0.0, 0.0, 0.0}};
  double delta = 0.0;
};

AssignmentSolution solution_from_binaries(const AssignmentProblem& problem,
                                          const AssignmentVars& vars, const Vec& x,
                                          double objective);

// Delta = max pairwise |P^a - P^b| / (P^A + P^B + P^C).
double compute_unbalance(double p_a, double p_b, double p_c);

// Independent re-check of every constraint family directly from the problem
// data; returns human-readable violation descriptions (empty = feasible).
std::vector<std::string> check_solution(const AssignmentProblem& problem,
                                        const AssignmentSolution& sol,
                                        double tol = 1e-9);

// Writes phases from the solution onto the candidate tree and attaches loads.
// Unenergized stub edges inherit the upstream phase so the graph stays fully
// labelled. The result passes validate_radial_phases with zero violations.
netmodel::NetworkGraph apply_solution(const AssignmentProblem& problem,
                                      const AssignmentSolution& sol);

// Text dump of the instance (objective + rows) for external cross-checks.
void dump_milp(const MilpInstance& instance, const std::filesystem::path& path);

// Solution JSON (binaries, objective, unbalance, per-phase totals).
std::string solution_to_json(const AssignmentSolution& sol);

}  // namespace gridforge::assignment

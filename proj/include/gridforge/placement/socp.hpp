// Relaxed branch-flow (DistFlow) model of a radial feeder and its conic
// program form. Works on a positive-sequence single-phase equivalent in per
// unit; the collapse from the three-phase network lives here too.
#pragma once

#include <optional>
#include <set>
#include <vector>

#include "gridforge/netmodel/network.hpp"
#include "gridforge/placement/ipm.hpp"

namespace gridforge::placement {

struct PlacementProblem {
  struct Line {
    int from = 0;  // upstream endpoint under root 0
    int to = 0;
    double r = 0.0;  // p.u.
    double x = 0.0;  // p.u.
  };
  int n_nodes = 0;
  std::vector<Line> lines;  // rooted tree edges, `to` is downstream
  Vec shunt_g, shunt_b;     // per node, p.u.
  Vec p_demand, q_demand;   // per node, p.u.
  // Component box bounds per node (zero rows forbid siting there).
  Vec pg_min, pg_max, qg_min, qg_max;
  double penetration_cap = 1.0;  // eps_p
  int max_components = 2;        // N_G
  Vec v2_min, v2_max;            // p.u.^2 per node
  Vec l_max;                     // squared-current cap per line
  double v2_root = 1.0;
  double s_base_kw = 1000.0;     // for reporting in kW

  void check() const;
};

// Variable layout of the conic program for a fixed support.
struct SocpVars {
  int n_edges = 0, n_nodes = 0, n_support = 0;
  int p_edge(int e) const { return e; }
  int q_edge(int e) const { return n_edges + e; }
  int l_edge(int e) const { return 2 * n_edges + e; }
  int v_node(int j) const { return 3 * n_edges + j; }
  int p_gen(int k) const { return 3 * n_edges + n_nodes + k; }
  int q_gen(int k) const { return 3 * n_edges + n_nodes + n_support + k; }
  int total() const { return 3 * n_edges + n_nodes + 2 * n_support; }
};

struct BuiltSocp {
  ConicProgram program;
  SocpVars vars;
  std::vector<int> support;  // sorted support nodes
};

// Continuous conic program with components allowed only on `support` (their
// u_j fixed to one; bounds taken from the problem's per-node boxes).
BuiltSocp build_socp(const PlacementProblem& problem, const std::set<int>& support);

struct ConicState {
  Vec edge_p, edge_q, edge_l;  // per edge, p.u.
  Vec v;                       // per node, p.u.^2
  Vec p_gen, q_gen;            // per node (zero off support)
  double loss_pu = 0.0;        // sum r * l
};

ConicState state_from_solution(const PlacementProblem& problem, const BuiltSocp& built,
                               const Vec& x);

// Max over edges of (l v_from - P^2 - Q^2) / max(1, l v_from); exact
// relaxations leave this at numerical zero.
double verify_cone_tightness(const PlacementProblem& problem, const ConicState& state);

// Violation of the equality constraints of the branch-flow model, evaluated
// independently of the conic program (max absolute residual).
double branch_flow_residual(const PlacementProblem& problem, const ConicState& state);

// Positive-sequence collapse of a three-phase network: per-edge impedance is
// the average of canvassed phase self terms, nodal demand the sum over
// phases. `loads_kw`/`loads_kvar` are N x 3.
PlacementProblem collapse_positive_sequence(const netmodel::NetworkGraph& network,
                                            const netmodel::ConductorCatalog& catalog,
                                            const Mat& loads_kw, const Mat& loads_kvar,
                                            double v_base_kv_ll, double s_base_kva);

}  // namespace gridforge::placement

#include "gridforge/placement/socp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gridforge::placement {

void PlacementProblem::check() const {
  if (n_nodes < 1) throw InvalidInputError("placement: empty network");
  if (static_cast<int>(lines.size()) != n_nodes - 1)
    throw StructureError("placement: network must be a rooted tree");
  for (const auto& line : lines) {
    if (line.r < 0.0) throw InvalidInputError("placement: negative resistance");
    if (line.from < 0 || line.from >= n_nodes || line.to <= 0 || line.to >= n_nodes)
      throw InvalidInputError("placement: line endpoint out of range");
  }
  if (!(penetration_cap >= 0.0 && penetration_cap <= 1.5))
    throw InvalidInputError("placement: penetration cap outside [0, 1.5]");
  if (max_components < 0) throw InvalidInputError("placement: N_G must be >= 0");
  for (int j = 0; j < n_nodes; ++j)
    if (v2_min[j] > v2_max[j]) throw InvalidInputError("placement: crossed voltage bounds");
}

BuiltSocp build_socp(const PlacementProblem& problem, const std::set<int>& support) {
  problem.check();
  for (int j : support)
    if (j <= 0 || j >= problem.n_nodes)
      throw InvalidInputError("build_socp: support node out of range (root excluded)");

  BuiltSocp built;
  built.support.assign(support.begin(), support.end());
  SocpVars& vars = built.vars;
  vars.n_edges = static_cast<int>(problem.lines.size());
  vars.n_nodes = problem.n_nodes;
  vars.n_support = static_cast<int>(built.support.size());

  ConicProgram& prog = built.program;
  const int n = vars.total();
  prog.c = Vec::Zero(n);
  for (int e = 0; e < vars.n_edges; ++e) prog.c[vars.l_edge(e)] = problem.lines[e].r;

  // Equalities: nodal balance (active + reactive) for every non-root node,
  // voltage drop per edge, root voltage pin.
  std::vector<Eigen::Triplet<double>> a_trips;
  std::vector<double> b_vals;
  std::vector<std::vector<int>> down_edges(problem.n_nodes);
  std::vector<int> up_edge(problem.n_nodes, -1);
  for (int e = 0; e < vars.n_edges; ++e) {
    down_edges[problem.lines[e].from].push_back(e);
    up_edge[problem.lines[e].to] = e;
  }
  auto add_row = [&](double rhs) {
    b_vals.push_back(rhs);
    return static_cast<int>(b_vals.size()) - 1;
  };
  std::map<int, int> support_index;
  for (int k = 0; k < vars.n_support; ++k) support_index[built.support[k]] = k;

  for (int j = 1; j < problem.n_nodes; ++j) {
    const int ue = up_edge[j];
    if (ue < 0) throw StructureError("build_socp: node " + std::to_string(j) + " unreachable");
    // Active:  sum_child P - P_up + r_up l_up + g_j v_j - p_G = -p_D.
    int row = add_row(-problem.p_demand[j]);
    for (int e : down_edges[j]) a_trips.emplace_back(row, vars.p_edge(e), 1.0);
    a_trips.emplace_back(row, vars.p_edge(ue), -1.0);
    a_trips.emplace_back(row, vars.l_edge(ue), problem.lines[ue].r);
    if (problem.shunt_g[j] != 0.0) a_trips.emplace_back(row, vars.v_node(j), problem.shunt_g[j]);
    if (auto it = support_index.find(j); it != support_index.end())
      a_trips.emplace_back(row, vars.p_gen(it->second), -1.0);
    // Reactive.
    row = add_row(-problem.q_demand[j]);
    for (int e : down_edges[j]) a_trips.emplace_back(row, vars.q_edge(e), 1.0);
    a_trips.emplace_back(row, vars.q_edge(ue), -1.0);
    a_trips.emplace_back(row, vars.l_edge(ue), problem.lines[ue].x);
    if (problem.shunt_b[j] != 0.0) a_trips.emplace_back(row, vars.v_node(j), problem.shunt_b[j]);
    if (auto it = support_index.find(j); it != support_index.end())
      a_trips.emplace_back(row, vars.q_gen(it->second), -1.0);
  }
  for (int e = 0; e < vars.n_edges; ++e) {
    const auto& line = problem.lines[e];
    const int row = add_row(0.0);
    a_trips.emplace_back(row, vars.v_node(line.to), 1.0);
    a_trips.emplace_back(row, vars.v_node(line.from), -1.0);
    a_trips.emplace_back(row, vars.p_edge(e), 2.0 * line.r);
    a_trips.emplace_back(row, vars.q_edge(e), 2.0 * line.x);
    a_trips.emplace_back(row, vars.l_edge(e), -(line.r * line.r + line.x * line.x));
  }
  {
    const int row = add_row(problem.v2_root);
    a_trips.emplace_back(row, vars.v_node(0), 1.0);
  }
  prog.a.resize(static_cast<int>(b_vals.size()), n);
  prog.a.setFromTriplets(a_trips.begin(), a_trips.end());
  prog.b = Eigen::Map<Vec>(b_vals.data(), b_vals.size());

  // Cone rows: the LP block first, then one SOC(4) per edge.
  std::vector<Eigen::Triplet<double>> g_trips;
  std::vector<double> h_vals;
  auto add_le = [&](int var, double coeff, double rhs) {
    // coeff * x_var <= rhs  ->  s = rhs - coeff x >= 0
    const int row = static_cast<int>(h_vals.size());
    h_vals.push_back(rhs);
    g_trips.emplace_back(row, var, coeff);
  };
  for (int j = 0; j < problem.n_nodes; ++j) {
    add_le(vars.v_node(j), 1.0, problem.v2_max[j]);
    add_le(vars.v_node(j), -1.0, -problem.v2_min[j]);
  }
  for (int e = 0; e < vars.n_edges; ++e) {
    add_le(vars.l_edge(e), 1.0, problem.l_max[e]);
    add_le(vars.l_edge(e), -1.0, 0.0);  // l >= 0
  }
  for (int k = 0; k < vars.n_support; ++k) {
    const int j = built.support[k];
    add_le(vars.p_gen(k), 1.0, problem.pg_max[j]);
    add_le(vars.p_gen(k), -1.0, -problem.pg_min[j]);
    add_le(vars.q_gen(k), 1.0, problem.qg_max[j]);
    add_le(vars.q_gen(k), -1.0, -problem.qg_min[j]);
  }
  if (vars.n_support > 0) {
    const int row = static_cast<int>(h_vals.size());
    h_vals.push_back(problem.penetration_cap * problem.p_demand.sum());
    for (int k = 0; k < vars.n_support; ++k) g_trips.emplace_back(row, vars.p_gen(k), 1.0);
  }
  const int lp_dim = static_cast<int>(h_vals.size());

  for (int e = 0; e < vars.n_edges; ++e) {
    const int from = problem.lines[e].from;
    int row = static_cast<int>(h_vals.size());
    // s = (l + v_from, 2P, 2Q, l - v_from) in SOC(4); h = 0, G = -ds/dx.
    h_vals.push_back(0.0);
    g_trips.emplace_back(row, vars.l_edge(e), -1.0);
    g_trips.emplace_back(row, vars.v_node(from), -1.0);
    row = static_cast<int>(h_vals.size());
    h_vals.push_back(0.0);
    g_trips.emplace_back(row, vars.p_edge(e), -2.0);
    row = static_cast<int>(h_vals.size());
    h_vals.push_back(0.0);
    g_trips.emplace_back(row, vars.q_edge(e), -2.0);
    row = static_cast<int>(h_vals.size());
    h_vals.push_back(0.0);
    g_trips.emplace_back(row, vars.l_edge(e), -1.0);
    g_trips.emplace_back(row, vars.v_node(from), 1.0);
  }
  prog.g.resize(static_cast<int>(h_vals.size()), n);
  prog.g.setFromTriplets(g_trips.begin(), g_trips.end());
  prog.h = Eigen::Map<Vec>(h_vals.data(), h_vals.size());
  prog.cones.lp_dim = lp_dim;
  prog.cones.soc_dims.assign(vars.n_edges, 4);
  return built;
}

ConicState state_from_solution(const PlacementProblem& problem, const BuiltSocp& built,
                               const Vec& x) {
  const SocpVars& vars = built.vars;
  ConicState state;
  state.edge_p = Vec::Zero(vars.n_edges);
  state.edge_q = Vec::Zero(vars.n_edges);
  state.edge_l = Vec::Zero(vars.n_edges);
  state.v = Vec::Zero(vars.n_nodes);
  state.p_gen = Vec::Zero(vars.n_nodes);
  state.q_gen = Vec::Zero(vars.n_nodes);
  for (int e = 0; e < vars.n_edges; ++e) {
    state.edge_p[e] = x[vars.p_edge(e)];
    state.edge_q[e] = x[vars.q_edge(e)];
    state.edge_l[e] = x[vars.l_edge(e)];
  }
  for (int j = 0; j < vars.n_nodes; ++j) state.v[j] = x[vars.v_node(j)];
  for (int k = 0; k < vars.n_support; ++k) {
    state.p_gen[built.support[k]] = x[vars.p_gen(k)];
    state.q_gen[built.support[k]] = x[vars.q_gen(k)];
  }
  state.loss_pu = 0.0;
  for (int e = 0; e < vars.n_edges; ++e)
    state.loss_pu += problem.lines[e].r * state.edge_l[e];
  return state;
}

double verify_cone_tightness(const PlacementProblem& problem, const ConicState& state) {
  double worst = 0.0;
  for (size_t e = 0; e < problem.lines.size(); ++e) {
    const double lv = state.edge_l[e] * state.v[problem.lines[e].from];
    const double quad =
        state.edge_p[e] * state.edge_p[e] + state.edge_q[e] * state.edge_q[e];
    worst = std::max(worst, (lv - quad) / std::max(1.0, lv));
  }
  return worst;
}

double branch_flow_residual(const PlacementProblem& problem, const ConicState& state) {
  const int n = problem.n_nodes;
  std::vector<std::vector<int>> down(n);
  std::vector<int> up(n, -1);
  for (size_t e = 0; e < problem.lines.size(); ++e) {
    down[problem.lines[e].from].push_back(static_cast<int>(e));
    up[problem.lines[e].to] = static_cast<int>(e);
  }
  double worst = 0.0;
  for (int j = 1; j < n; ++j) {
    const int ue = up[j];
    double p = -state.edge_p[ue] + problem.lines[ue].r * state.edge_l[ue] +
               problem.shunt_g[j] * state.v[j] + problem.p_demand[j] - state.p_gen[j];
    double q = -state.edge_q[ue] + problem.lines[ue].x * state.edge_l[ue] +
               problem.shunt_b[j] * state.v[j] + problem.q_demand[j] - state.q_gen[j];
    for (int e : down[j]) {
      p += state.edge_p[e];
      q += state.edge_q[e];
    }
    worst = std::max({worst, std::abs(p), std::abs(q)});
  }
  for (size_t e = 0; e < problem.lines.size(); ++e) {
    const auto& line = problem.lines[e];
    const double drop = state.v[line.to] - state.v[line.from] +
                        2.0 * (line.r * state.edge_p[e] + line.x * state.edge_q[e]) -
                        (line.r * line.r + line.x * line.x) * state.edge_l[e];
    worst = std::max(worst, std::abs(drop));
  }
  return worst;
}

PlacementProblem collapse_positive_sequence(const netmodel::NetworkGraph& network,
                                            const netmodel::ConductorCatalog& catalog,
                                            const Mat& loads_kw, const Mat& loads_kvar,
                                            double v_base_kv_ll, double s_base_kva) {
  auto parent = netmodel::tree_parents(network, 0);
  PlacementProblem problem;
  problem.n_nodes = network.n_nodes();
  const double z_base = v_base_kv_ll * v_base_kv_ll * 1000.0 / s_base_kva;  // ohm
  for (const auto& edge : network.edges) {
    PlacementProblem::Line line;
    const bool forward = parent[edge.to_node] == edge.from_node;
    line.from = forward ? edge.from_node : edge.to_node;
    line.to = forward ? edge.to_node : edge.from_node;
    const auto& spec = catalog.at(edge.conductor_code);
    line.r = spec.resistance_ohm_per_mile * edge.length_mi / z_base;
    line.x = spec.reactance_ohm_per_mile * edge.length_mi / z_base;
    problem.lines.push_back(line);
  }
  const int n = problem.n_nodes;
  problem.shunt_g = Vec::Zero(n);
  problem.shunt_b = Vec::Zero(n);
  problem.p_demand = loads_kw.rowwise().sum() / s_base_kva;
  problem.q_demand = loads_kvar.rowwise().sum() / s_base_kva;
  problem.pg_min = Vec::Zero(n);
  problem.pg_max = Vec::Zero(n);
  problem.qg_min = Vec::Zero(n);
  problem.qg_max = Vec::Zero(n);
  problem.v2_min = Vec::Constant(n, 0.81);
  problem.v2_max = Vec::Constant(n, 1.21);
  problem.l_max = Vec::Constant(n - 1, 100.0);
  problem.s_base_kw = s_base_kva;
  return problem;
}

}  // namespace gridforge::placement

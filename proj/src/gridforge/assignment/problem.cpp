#include "gridforge/assignment/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gridforge/common/io_util.hpp"

namespace gridforge::assignment {

using netmodel::NetworkGraph;
using netmodel::NodeKind;
using netmodel::Phase;

namespace {

constexpr const char* kPhaseNames = "ABC";

struct TreeView {
  std::vector<int> parent;          // parent node per node (-1 at root)
  std::vector<int> edge_child;      // downstream endpoint per edge
  std::vector<std::vector<int>> children;  // child nodes per node
};

TreeView tree_view(const NetworkGraph& g) {
  TreeView view;
  view.parent = netmodel::tree_parents(g, 0);  // throws StructureError if not a tree
  view.children.resize(g.n_nodes());
  for (int v = 1; v < g.n_nodes(); ++v) view.children[view.parent[v]].push_back(v);
  view.edge_child.resize(g.n_edges());
  for (int e = 0; e < g.n_edges(); ++e) {
    const auto& edge = g.edges[e];
    if (view.parent[edge.to_node] == edge.from_node)
      view.edge_child[e] = edge.to_node;
    else if (view.parent[edge.from_node] == edge.to_node)
      view.edge_child[e] = edge.from_node;
    else
      throw StructureError("candidate edge " + std::to_string(e) + " is not a tree edge");
  }
  return view;
}

}  // namespace

BuiltAssignment build_assignment(const AssignmentProblem& problem) {
  const NetworkGraph& g = problem.candidate;
  if (problem.q.rows() != g.n_edges() || problem.q.cols() != 3)
    throw InvalidInputError("build_assignment: Q must be N_e x 3 aligned to the edges");
  TreeView tree = tree_view(g);

  for (const auto& load : problem.single_loads)
    if (load.host_node < 0 || load.host_node >= g.n_nodes())
      throw DataError("single-phase load host node absent: " + std::to_string(load.host_node));
  for (const auto& load : problem.three_loads)
    if (load.host_node < 0 || load.host_node >= g.n_nodes())
      throw DataError("three-phase load host node absent: " + std::to_string(load.host_node));
  if (!(problem.delta_set > 0.0 && problem.delta_set <= 1.0))
    throw InvalidInputError("build_assignment: delta_set must lie in (0, 1]");

  BuiltAssignment built;
  built.edge_child = tree.edge_child;
  AssignmentVars& vars = built.vars;
  vars.n_single = static_cast<int>(problem.single_loads.size());
  vars.n_three = static_cast<int>(problem.three_loads.size());
  vars.n_nodes = g.n_nodes();
  vars.n_edges = g.n_edges();

  MilpInstance& inst = built.instance;
  inst.n_vars = vars.total();
  inst.objective = Vec::Zero(inst.n_vars);
  inst.var_names.resize(inst.n_vars);
  for (int k = 0; k < vars.n_single; ++k)
    for (int p = 0; p < 3; ++p)
      inst.var_names[vars.u_single(k, p)] =
          "uL" + std::to_string(k) + "_" + kPhaseNames[p];
  for (int j = 0; j < vars.n_three; ++j)
    for (int p = 0; p < 3; ++p)
      inst.var_names[vars.u_three(j, p)] = "uI" + std::to_string(j) + "_" + kPhaseNames[p];
  for (int n = 0; n < vars.n_nodes; ++n)
    for (int p = 0; p < 3; ++p)
      inst.var_names[vars.u_node(n, p)] = "un" + std::to_string(n) + "_" + kPhaseNames[p];
  for (int e = 0; e < vars.n_edges; ++e)
    for (int p = 0; p < 3; ++p)
      inst.var_names[vars.u_edge(e, p)] = "ue" + std::to_string(e) + "_" + kPhaseNames[p];
  for (int n = 0; n < vars.n_nodes; ++n) {
    inst.var_names[vars.b_three_node(n)] = "b" + std::to_string(n);
    inst.var_names[vars.z_energized(n)] = "z" + std::to_string(n);
  }

  // Objective: (Q - u)^2 = Q^2 + (1 - 2Q) u over binaries.
  inst.objective_constant = problem.q.array().square().sum();
  for (int e = 0; e < vars.n_edges; ++e)
    for (int p = 0; p < 3; ++p)
      inst.objective[vars.u_edge(e, p)] = 1.0 - 2.0 * problem.q(e, p);

  auto row = [&](RowSense sense, double rhs, std::string tag) -> MilpRow& {
    inst.rows.push_back({{}, sense, rhs, std::move(tag)});
    return inst.rows.back();
  };

  // Each single-phase load sits on exactly one phase.
  for (int k = 0; k < vars.n_single; ++k) {
    auto& r = row(RowSense::EQ, 1.0, "single-phase-choice");
    for (int p = 0; p < 3; ++p) r.coeffs.push_back({vars.u_single(k, p), 1.0});
  }

  // Three-phase loads energize all phases of themselves and their host node.
  for (int j = 0; j < vars.n_three; ++j) {
    for (int p = 0; p < 3; ++p) {
      auto& r1 = row(RowSense::EQ, 1.0, "three-phase-fix");
      r1.coeffs.push_back({vars.u_three(j, p), 1.0});
      auto& r2 = row(RowSense::EQ, 1.0, "three-phase-host");
      r2.coeffs.push_back({vars.u_node(problem.three_loads[j].host_node, p), 1.0});
    }
  }

  // Substation node carries all three phases.
  for (int p = 0; p < 3; ++p) {
    auto& r = row(RowSense::EQ, 1.0, "root-phase");
    r.coeffs.push_back({vars.u_node(0, p), 1.0});
  }

  // Boolean-OR link per node and phase: lower side from hosted loads, upper
  // cap from hosted loads plus downstream child nodes.
  std::vector<std::vector<int>> singles_at(vars.n_nodes), threes_at(vars.n_nodes);
  for (int k = 0; k < vars.n_single; ++k)
    singles_at[problem.single_loads[k].host_node].push_back(k);
  for (int j = 0; j < vars.n_three; ++j)
    threes_at[problem.three_loads[j].host_node].push_back(j);
  for (int n = 1; n < vars.n_nodes; ++n) {
    for (int p = 0; p < 3; ++p) {
      for (int k : singles_at[n]) {
        auto& r = row(RowSense::GE, 0.0, "or-lower");
        r.coeffs.push_back({vars.u_node(n, p), 1.0});
        r.coeffs.push_back({vars.u_single(k, p), -1.0});
      }
      auto& cap = row(RowSense::LE, 0.0, "or-upper");
      cap.coeffs.push_back({vars.u_node(n, p), 1.0});
      for (int k : singles_at[n]) cap.coeffs.push_back({vars.u_single(k, p), -1.0});
      for (int j : threes_at[n]) cap.coeffs.push_back({vars.u_three(j, p), -1.0});
      for (int child : tree.children[n]) cap.coeffs.push_back({vars.u_node(child, p), -1.0});
    }
  }

  // Upstream/downstream rule per edge: the parent node dominates the child,
  // and the edge carries exactly the child node's phases.
  for (int e = 0; e < vars.n_edges; ++e) {
    const int child = tree.edge_child[e];
    const int parent = tree.parent[child];
    for (int p = 0; p < 3; ++p) {
      auto& r1 = row(RowSense::GE, 0.0, "phase-monotone");
      r1.coeffs.push_back({vars.u_node(parent, p), 1.0});
      r1.coeffs.push_back({vars.u_node(child, p), -1.0});
      auto& r2 = row(RowSense::EQ, 0.0, "edge-equals-child");
      r2.coeffs.push_back({vars.u_edge(e, p), 1.0});
      r2.coeffs.push_back({vars.u_node(child, p), -1.0});
    }
  }

  // Representable phase sets only: per node, sum of phases = z + 2b with
  // b <= z, so the count is 0 (dead stub), 1 or 3.
  for (int n = 0; n < vars.n_nodes; ++n) {
    auto& r = row(RowSense::EQ, 0.0, "phase-cardinality");
    for (int p = 0; p < 3; ++p) r.coeffs.push_back({vars.u_node(n, p), 1.0});
    r.coeffs.push_back({vars.b_three_node(n), -2.0});
    r.coeffs.push_back({vars.z_energized(n), -1.0});
    auto& link = row(RowSense::LE, 0.0, "cardinality-link");
    link.coeffs.push_back({vars.b_three_node(n), 1.0});
    link.coeffs.push_back({vars.z_energized(n), -1.0});
  }

  // Unbalance cap, normalized by the (constant) total demand so the row
  // coefficients stay O(1).
  double p_total = 0.0;
  for (const auto& load : problem.single_loads) p_total += load.p_kw;
  for (const auto& load : problem.three_loads) p_total += load.p_kw;
  if (p_total > 0.0) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        auto& r = row(RowSense::LE, problem.delta_set, "unbalance");
        for (int k = 0; k < vars.n_single; ++k) {
          const double w = problem.single_loads[k].p_kw / p_total;
          if (w == 0.0) continue;
          r.coeffs.push_back({vars.u_single(k, a), w});
          r.coeffs.push_back({vars.u_single(k, b), -w});
        }
        for (int j = 0; j < vars.n_three; ++j) {
          const double w = problem.three_loads[j].p_kw / (3.0 * p_total);
          if (w == 0.0) continue;
          r.coeffs.push_back({vars.u_three(j, a), w});
          r.coeffs.push_back({vars.u_three(j, b), -w});
        }
      }
    }
  }
  return built;
}

double quadratic_objective(const AssignmentProblem& problem, const Mat& u_edge) {
  double total = 0.0;
  for (int e = 0; e < problem.q.rows(); ++e)
    for (int p = 0; p < 3; ++p) {
      const double d = problem.q(e, p) - u_edge(e, p);
      total += d * d;
    }
  return total;
}

AssignmentSolution solution_from_binaries(const AssignmentProblem& problem,
                                          const AssignmentVars& vars, const Vec& x,
                                          double objective) {
  AssignmentSolution sol;
  auto rounded = [&](int idx) { return x[idx] > 0.5 ? 1.0 : 0.0; };
  sol.u_single = Mat::Zero(vars.n_single, 3);
  sol.u_three = Mat::Zero(vars.n_three, 3);
  sol.u_node = Mat::Zero(vars.n_nodes, 3);
  sol.u_edge = Mat::Zero(vars.n_edges, 3);
  for (int k = 0; k < vars.n_single; ++k)
    for (int p = 0; p < 3; ++p) sol.u_single(k, p) = rounded(vars.u_single(k, p));
  for (int j = 0; j < vars.n_three; ++j)
    for (int p = 0; p < 3; ++p) sol.u_three(j, p) = rounded(vars.u_three(j, p));
  for (int n = 0; n < vars.n_nodes; ++n)
    for (int p = 0; p < 3; ++p) sol.u_node(n, p) = rounded(vars.u_node(n, p));
  for (int e = 0; e < vars.n_edges; ++e)
    for (int p = 0; p < 3; ++p) sol.u_edge(e, p) = rounded(vars.u_edge(e, p));
  sol.objective = objective;
  for (int p = 0; p < 3; ++p) {
    double total = 0.0;
    for (int k = 0; k < vars.n_single; ++k)
      total += sol.u_single(k, p) * problem.single_loads[k].p_kw;
    for (int j = 0; j < vars.n_three; ++j)
      total += sol.u_three(j, p) * problem.three_loads[j].p_kw / 3.0;
    sol.phase_totals_kw[p] = total;
  }
  const double sum =
      sol.phase_totals_kw[0] + sol.phase_totals_kw[1] + sol.phase_totals_kw[2];
  sol.delta = sum > 0.0 ? compute_unbalance(sol.phase_totals_kw[0], sol.phase_totals_kw[1],
                                            sol.phase_totals_kw[2])
                        : 0.0;
  return sol;
}

double compute_unbalance(double p_a, double p_b, double p_c) {
  if (p_a < 0.0 || p_b < 0.0 || p_c < 0.0)
    throw InvalidInputError("compute_unbalance: totals must be >= 0");
  const double sum = p_a + p_b + p_c;
  if (sum <= 0.0) throw DataError("compute_unbalance: all-zero totals, ratio undefined");
  const double gap = std::max({std::abs(p_a - p_b), std::abs(p_a - p_c), std::abs(p_b - p_c)});
  return gap / sum;
}

std::vector<std::string> check_solution(const AssignmentProblem& problem,
                                        const AssignmentSolution& sol, double tol) {
  std::vector<std::string> violations;
  const NetworkGraph& g = problem.candidate;
  TreeView tree = tree_view(g);
  auto note = [&](const std::string& msg) { violations.push_back(msg); };

  for (int k = 0; k < sol.u_single.rows(); ++k) {
    if (std::abs(sol.u_single.row(k).sum() - 1.0) > tol)
      note("single load " + std::to_string(k) + " not on exactly one phase");
    const int host = problem.single_loads[k].host_node;
    for (int p = 0; p < 3; ++p)
      if (sol.u_single(k, p) > sol.u_node(host, p) + tol)
        note("single load " + std::to_string(k) + " on a phase its node lacks");
  }
  for (int j = 0; j < sol.u_three.rows(); ++j) {
    const int host = problem.three_loads[j].host_node;
    for (int p = 0; p < 3; ++p) {
      if (std::abs(sol.u_three(j, p) - 1.0) > tol)
        note("three-phase load " + std::to_string(j) + " missing phase");
      if (std::abs(sol.u_node(host, p) - 1.0) > tol)
        note("three-phase host node " + std::to_string(host) + " missing phase");
    }
  }
  for (int e = 0; e < g.n_edges(); ++e) {
    const int child = tree.edge_child[e];
    const int parent = tree.parent[child];
    for (int p = 0; p < 3; ++p) {
      if (sol.u_node(child, p) > sol.u_node(parent, p) + tol)
        note("edge " + std::to_string(e) + " child phase exceeds parent");
      if (std::abs(sol.u_edge(e, p) - sol.u_node(child, p)) > tol)
        note("edge " + std::to_string(e) + " phase differs from its child node");
    }
  }
  for (int n = 0; n < sol.u_node.rows(); ++n) {
    const double count = sol.u_node.row(n).sum();
    if (!(std::abs(count) < tol || std::abs(count - 1.0) < tol || std::abs(count - 3.0) < tol))
      note("node " + std::to_string(n) + " phase count " + std::to_string(count) +
           " not in {0,1,3}");
  }
  // OR semantics upper side: a non-root node may only be energized on a phase
  // demanded by a hosted load or passed through to a child.
  for (int n = 1; n < sol.u_node.rows(); ++n) {
    for (int p = 0; p < 3; ++p) {
      if (sol.u_node(n, p) < 0.5) continue;
      double support = 0.0;
      for (int k = 0; k < sol.u_single.rows(); ++k)
        if (problem.single_loads[k].host_node == n) support += sol.u_single(k, p);
      for (int j = 0; j < sol.u_three.rows(); ++j)
        if (problem.three_loads[j].host_node == n) support += sol.u_three(j, p);
      for (int child = 1; child < sol.u_node.rows(); ++child)
        if (tree.parent[child] == n) support += sol.u_node(child, p);
      if (support < 0.5)
        note("node " + std::to_string(n) + " energized on an undemanded phase");
    }
  }
  const double sum =
      sol.phase_totals_kw[0] + sol.phase_totals_kw[1] + sol.phase_totals_kw[2];
  if (sum > 0.0) {
    const double delta = compute_unbalance(sol.phase_totals_kw[0], sol.phase_totals_kw[1],
                                           sol.phase_totals_kw[2]);
    if (delta > problem.delta_set + tol)
      note("unbalance " + std::to_string(delta) + " exceeds cap " +
           std::to_string(problem.delta_set));
  }
  return violations;
}

netmodel::NetworkGraph apply_solution(const AssignmentProblem& problem,
                                      const AssignmentSolution& sol) {
  auto feasibility = check_solution(problem, sol);
  if (!feasibility.empty())
    throw InvalidInputError("apply_solution: infeasible solution: " + feasibility.front());
  NetworkGraph g = problem.candidate;
  TreeView tree = tree_view(g);

  auto mask_of = [](const Mat& m, int row) {
    int mask = 0;
    for (int p = 0; p < 3; ++p)
      if (m(row, p) > 0.5) mask |= 1 << p;
    return mask;
  };

  // Resolve node masks; unenergized nodes inherit from their parent so every
  // element keeps a representable tag.
  std::vector<int> node_mask(g.n_nodes(), 0);
  node_mask[0] = 7;
  std::vector<int> order;  // BFS order from root
  order.push_back(0);
  for (size_t i = 0; i < order.size(); ++i)
    for (int child : tree.children[order[i]]) order.push_back(child);
  for (int v : order) {
    if (v == 0) continue;
    int mask = mask_of(sol.u_node, v);
    if (mask == 0) mask = node_mask[tree.parent[v]];
    node_mask[v] = mask;
  }

  std::vector<bool> hosts_load(g.n_nodes(), false);
  for (const auto& load : problem.single_loads) hosts_load[load.host_node] = true;
  for (const auto& load : problem.three_loads) hosts_load[load.host_node] = true;

  for (int v = 0; v < g.n_nodes(); ++v) {
    auto tag = netmodel::phase_from_mask(node_mask[v]);
    if (!tag)
      throw InvalidInputError("apply_solution: node " + std::to_string(v) +
                              " has an unrepresentable phase set");
    g.nodes[v].phase = *tag;
    g.nodes[v].kind = v == 0 ? NodeKind::Substation
                             : (hosts_load[v] ? NodeKind::Load : NodeKind::Junction);
  }
  for (int e = 0; e < g.n_edges(); ++e) {
    int mask = mask_of(sol.u_edge, e);
    if (mask == 0) mask = node_mask[tree.edge_child[e]];
    auto tag = netmodel::phase_from_mask(mask);
    if (!tag)
      throw InvalidInputError("apply_solution: edge " + std::to_string(e) +
                              " has an unrepresentable phase set");
    g.edges[e].phase = *tag;
  }
  return g;
}

void dump_milp(const MilpInstance& instance, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# binary variables: " << instance.n_vars << "\n";
  out << "# objective constant: " << format_double(instance.objective_constant) << "\n";
  out << "min:";
  for (int j = 0; j < instance.n_vars; ++j)
    if (instance.objective[j] != 0.0)
      out << ' ' << format_double(instance.objective[j]) << '*' << instance.var_names[j];
  out << "\n";
  for (const auto& row : instance.rows) {
    out << row.tag << ':';
    for (const auto& [j, coeff] : row.coeffs)
      out << ' ' << format_double(coeff) << '*' << instance.var_names[j];
    switch (row.sense) {
      case RowSense::LE: out << " <= "; break;
      case RowSense::EQ: out << " = "; break;
      case RowSense::GE: out << " >= "; break;
    }
    out << format_double(row.rhs) << "\n";
  }
  write_text_file(path, out.str());
}

std::string solution_to_json(const AssignmentSolution& sol) {
  nlohmann::json doc;
  auto mat_to_rows = [](const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c) > 0.5 ? 1 : 0);
      rows.push_back(std::move(row));
    }
    return rows;
  };
  doc["u_single"] = mat_to_rows(sol.u_single);
  doc["u_three"] = mat_to_rows(sol.u_three);
  doc["u_node"] = mat_to_rows(sol.u_node);
  doc["u_edge"] = mat_to_rows(sol.u_edge);
  doc["objective"] = sol.objective;
  doc["delta"] = sol.delta;
  doc["phase_totals_kw"] = {sol.phase_totals_kw[0], sol.phase_totals_kw[1],
                            sol.phase_totals_kw[2]};
  return doc.dump(2) + "\n";
}

}  // namespace gridforge::assignment

#include "gridforge/netmodel/indices.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace gridforge::netmodel {

DegreeStats degree_stats(const NetworkGraph& g) {
  if (g.n_nodes() == 0) throw InvalidInputError("degree_stats: empty graph");
  auto deg = g.degrees();
  DegreeStats stats;
  stats.d_avg = 2.0 * g.n_edges() / g.n_nodes();
  stats.d_max = *std::max_element(deg.begin(), deg.end());
  int branching = 0;
  for (int d : deg)
    if (d > 3) ++branching;
  stats.branching_rate = static_cast<double>(branching) / g.n_nodes();
  return stats;
}

double assortativity(const NetworkGraph& g) {
  if (g.n_edges() < 2) throw InvalidInputError("assortativity: need at least 2 edges");
  auto deg = g.degrees();
  // Symmetrized pairs: each edge contributes (deg_u, deg_v) and (deg_v, deg_u),
  // so the two coordinates share the same mean and variance.
  const double m2 = 2.0 * g.n_edges();
  double sum = 0.0, sum_sq = 0.0, sum_xy = 0.0;
  for (const auto& e : g.edges) {
    const double du = deg[e.from_node];
    const double dv = deg[e.to_node];
    sum += du + dv;
    sum_sq += du * du + dv * dv;
    sum_xy += 2.0 * du * dv;
  }
  const double mean = sum / m2;
  const double var = sum_sq / m2 - mean * mean;
  if (var <= 1e-12 * std::max(1.0, mean * mean))
    throw NumericError("assortativity: zero degree variance over edge endpoints");
  const double cov = sum_xy / m2 - mean * mean;
  return cov / var;
}

int max_depth(const NetworkGraph& g, int root) {
  auto parent = tree_parents(g, root);  // throws on non-radial input
  auto adj = g.neighbors();
  std::vector<int> depth(g.n_nodes(), 0);
  std::queue<int> bfs;
  bfs.push(root);
  int deepest = 0;
  std::vector<bool> seen(g.n_nodes(), false);
  seen[root] = true;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    deepest = std::max(deepest, depth[v]);
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        depth[w] = depth[v] + 1;
        bfs.push(w);
      }
    }
  }
  return deepest;
}

double overlap_ratio(const NetworkGraph& g1, const NetworkGraph& g2) {
  if (g1.n_nodes() != g2.n_nodes())
    throw InvalidInputError("overlap_ratio: node counts differ");
  if (g1.n_edges() == 0) throw InvalidInputError("overlap_ratio: first graph has no edges");
  std::set<std::pair<int, int>> set2;
  for (const auto& e : g2.edges) set2.insert(std::minmax(e.from_node, e.to_node));
  int shared = 0;
  for (const auto& e : g1.edges)
    if (set2.count(std::minmax(e.from_node, e.to_node))) ++shared;
  return static_cast<double>(shared) / g1.n_edges();
}

std::vector<PhaseViolation> validate_radial_phases(const NetworkGraph& g) {
  const int root = 0;
  auto up = upstream_edges(g, root);  // throws on non-radial input
  std::vector<PhaseViolation> violations;
  for (int i = 0; i < g.n_edges(); ++i) {
    const auto& e = g.edges[i];
    // The upstream endpoint's own upstream edge is this edge's parent.
    const int child_end = (up[e.to_node] == i) ? e.to_node : e.from_node;
    const int parent_end = (child_end == e.to_node) ? e.from_node : e.to_node;
    const int parent_edge = up[parent_end];
    if (parent_edge < 0) continue;  // edge hangs off the root
    if (!phase_subset(e.phase, g.edges[parent_edge].phase)) {
      violations.push_back({PhaseViolation::Kind::EdgePhaseNotSubset, i, -1,
                            "edge " + std::to_string(i) + " phase " + to_string(e.phase) +
                                " exceeds parent edge phase " +
                                to_string(g.edges[parent_edge].phase)});
    }
  }
  for (const auto& node : g.nodes) {
    if (node.kind != NodeKind::Load) continue;
    const int edge = up[node.index];
    if (edge < 0) continue;  // load at root; nothing upstream to match
    if (phase_mask(node.phase) != phase_mask(g.edges[edge].phase)) {
      violations.push_back({PhaseViolation::Kind::LoadPhaseMismatch, -1, node.index,
                            "load node " + std::to_string(node.index) + " phase " +
                                to_string(node.phase) + " != upstream edge phase " +
                                to_string(g.edges[edge].phase)});
    }
  }
  return violations;
}

TopoIndices topo_indices(const NetworkGraph& g, int root) {
  TopoIndices out;
  out.n_nodes = g.n_nodes();
  out.n_edges = g.n_edges();
  const auto stats = degree_stats(g);
  out.d_avg = stats.d_avg;
  out.d_max = stats.d_max;
  out.branching_rate = stats.branching_rate;
  out.assortativity = assortativity(g);
  out.max_depth = max_depth(g, root);
  return out;
}

}  // namespace gridforge::netmodel

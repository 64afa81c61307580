#include "gridforge/netmodel/network.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

namespace gridforge::netmodel {

std::optional<Phase> phase_from_mask(int mask) {
  switch (mask) {
    case 1: return Phase::A;
    case 2: return Phase::B;
    case 4: return Phase::C;
    case 7: return Phase::ABC;
    default: return std::nullopt;
  }
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::A: return "A";
    case Phase::B: return "B";
    case Phase::C: return "C";
    case Phase::ABC: return "ABC";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "A") return Phase::A;
  if (s == "B") return Phase::B;
  if (s == "C") return Phase::C;
  if (s == "ABC") return Phase::ABC;
  throw InvalidInputError("unknown phase tag: '" + s + "' (two-phase elements are not supported)");
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Junction: return "junction";
    case NodeKind::Load: return "load";
    case NodeKind::Substation: return "substation";
  }
  return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "junction") return NodeKind::Junction;
  if (s == "load") return NodeKind::Load;
  if (s == "substation") return NodeKind::Substation;
  throw InvalidInputError("unknown node kind: '" + s + "'");
}

Eigen::MatrixX2i NetworkGraph::edge_matrix() const {
  Eigen::MatrixX2i e(n_edges(), 2);
  for (int i = 0; i < n_edges(); ++i) {
    e(i, 0) = std::min(edges[i].from_node, edges[i].to_node);
    e(i, 1) = std::max(edges[i].from_node, edges[i].to_node);
  }
  return e;
}

std::vector<std::vector<int>> NetworkGraph::incident_edges() const {
  std::vector<std::vector<int>> inc(nodes.size());
  for (int i = 0; i < n_edges(); ++i) {
    inc[edges[i].from_node].push_back(i);
    inc[edges[i].to_node].push_back(i);
  }
  return inc;
}

std::vector<std::vector<int>> NetworkGraph::neighbors() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const auto& e : edges) {
    adj[e.from_node].push_back(e.to_node);
    adj[e.to_node].push_back(e.from_node);
  }
  return adj;
}

std::vector<int> NetworkGraph::degrees() const {
  std::vector<int> deg(nodes.size(), 0);
  for (const auto& e : edges) {
    ++deg[e.from_node];
    ++deg[e.to_node];
  }
  return deg;
}

void validate(const NetworkGraph& g) {
  const int n = g.n_nodes();
  if (n == 0) throw InvalidInputError("empty graph");
  std::vector<bool> seen(n, false);
  int substations = 0;
  for (const auto& node : g.nodes) {
    if (node.index < 0 || node.index >= n)
      throw InvalidInputError("node index out of range: " + std::to_string(node.index));
    if (seen[node.index])
      throw InvalidInputError("duplicate node index: " + std::to_string(node.index));
    seen[node.index] = true;
    if (node.kind == NodeKind::Substation) ++substations;
  }
  if (substations != 1) throw InvalidInputError("exactly one substation node required");
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : g.edges) {
    if (e.from_node < 0 || e.from_node >= n || e.to_node < 0 || e.to_node >= n)
      throw InvalidInputError("edge endpoint out of range");
    if (e.from_node == e.to_node) throw InvalidInputError("self-loop not allowed");
    auto key = std::minmax(e.from_node, e.to_node);
    if (!pairs.insert(key).second)
      throw InvalidInputError("duplicate edge between nodes " + std::to_string(key.first) +
                              " and " + std::to_string(key.second));
    if (e.length_mi < 0.0) throw InvalidInputError("edge length must be >= 0");
  }
}

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};
}  // namespace

bool is_radial(const NetworkGraph& g) {
  if (g.n_nodes() == 0) return false;
  if (g.n_edges() != g.n_nodes() - 1) return false;
  UnionFind uf(g.n_nodes());
  int merges = 0;
  for (const auto& e : g.edges)
    if (uf.unite(e.from_node, e.to_node)) ++merges;
  return merges == g.n_nodes() - 1;
}

std::vector<int> tree_parents(const NetworkGraph& g, int root) {
  if (root < 0 || root >= g.n_nodes()) throw InvalidInputError("root node does not exist");
  if (!is_radial(g)) throw StructureError("graph is not radial");
  std::vector<int> parent(g.n_nodes(), -2);
  auto adj = g.neighbors();
  std::queue<int> bfs;
  bfs.push(root);
  parent[root] = -1;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int w : adj[v]) {
      if (parent[w] == -2) {
        parent[w] = v;
        bfs.push(w);
      }
    }
  }
  return parent;
}

std::vector<int> upstream_edges(const NetworkGraph& g, int root) {
  auto parent = tree_parents(g, root);
  std::vector<int> up(g.n_nodes(), -1);
  for (int i = 0; i < g.n_edges(); ++i) {
    const auto& e = g.edges[i];
    if (parent[e.to_node] == e.from_node) up[e.to_node] = i;
    if (parent[e.from_node] == e.to_node) up[e.from_node] = i;
  }
  return up;
}

}  // namespace gridforge::netmodel

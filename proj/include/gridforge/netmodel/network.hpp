// Radial multi-phase network data model.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridforge/common/error.hpp"

namespace gridforge::netmodel {

// Phase tag of a node, edge or load. ABC denotes a three-phase element;
// two-phase elements are not representable and are rejected at parse time.
enum class Phase : std::uint8_t { A, B, C, ABC };

// Bitmask over {A=1, B=2, C=4}; ABC -> 7.
inline int phase_mask(Phase p) {
  switch (p) {
    case Phase::A: return 1;
    case Phase::B: return 2;
    case Phase::C: return 4;
    case Phase::ABC: return 7;
  }
  return 0;
}

// Maps a mask back to a tag; only cardinality 1 or 3 masks are representable.
std::optional<Phase> phase_from_mask(int mask);

inline bool phase_subset(Phase child, Phase parent) {
  return (phase_mask(child) & ~phase_mask(parent)) == 0;
}

std::string to_string(Phase p);
Phase phase_from_string(const std::string& s);

enum class NodeKind : std::uint8_t { Junction, Load, Substation };
std::string to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

struct NodeRecord {
  int index = 0;
  Phase phase = Phase::ABC;
  NodeKind kind = NodeKind::Junction;
};

struct EdgeRecord {
  int from_node = 0;
  int to_node = 0;
  Phase phase = Phase::ABC;
  std::string conductor_code;
  double length_mi = 0.0;
};

struct ConductorSpec {
  Phase phases_supported = Phase::ABC;
  double resistance_ohm_per_mile = 0.0;  // self term, applied per phase
  double reactance_ohm_per_mile = 0.0;
  double ampacity_a = 0.0;
  bool is_series_device = false;
  // Optional full 3x3 impedance (ohm/mile) with mutual terms; when absent the
  // per-phase self terms above are used on the diagonal.
  std::optional<Eigen::Matrix3d> r_matrix;
  std::optional<Eigen::Matrix3d> x_matrix;
};

struct ConductorCatalog {
  std::map<std::string, ConductorSpec> entries;

  const ConductorSpec& at(const std::string& code) const {
    auto it = entries.find(code);
    if (it == entries.end()) throw CatalogError("unknown conductor code: " + code);
    return it->second;
  }
  bool contains(const std::string& code) const { return entries.count(code) != 0; }
};

// Undirected simple graph with dense node indices; node 0 is the substation
// root in every file we read or write.
struct NetworkGraph {
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  // N_e x 2 ordered endpoint table with row (i,0) < row (i,1).
  Eigen::MatrixX2i edge_matrix() const;

  // Adjacency as incident-edge lists: adjacency()[v] = indices into `edges`.
  std::vector<std::vector<int>> incident_edges() const;
  std::vector<std::vector<int>> neighbors() const;

  std::vector<int> degrees() const;
};

// Structural checks. validate() throws on broken basic invariants
// (self-loop, duplicate edge, out-of-range endpoint, sparse indices).
void validate(const NetworkGraph& g);

// Connected and N_e == N_n - 1, decided by union-find.
bool is_radial(const NetworkGraph& g);

// Parent array of the tree rooted at `root`; parent[root] = -1.
// Throws StructureError when the graph is not radial.
std::vector<int> tree_parents(const NetworkGraph& g, int root);

// Index of each node's upstream edge under root; -1 for the root itself.
std::vector<int> upstream_edges(const NetworkGraph& g, int root);

}  // namespace gridforge::netmodel

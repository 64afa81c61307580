// Topological indices of a distribution network.
#pragma once

#include <string>
#include <vector>

#include "gridforge/netmodel/network.hpp"

namespace gridforge::netmodel {

struct DegreeStats {
  double d_avg = 0.0;
  int d_max = 0;
  double branching_rate = 0.0;  // fraction of nodes with degree > 3
};

struct TopoIndices {
  int n_nodes = 0;
  int n_edges = 0;
  double d_avg = 0.0;
  int d_max = 0;
  double branching_rate = 0.0;
  double assortativity = 0.0;
  int max_depth = 0;
  double overlap_ratio = 0.0;  // filled by callers that compare two graphs
};

DegreeStats degree_stats(const NetworkGraph& g);

// Pearson correlation of endpoint degrees over the symmetrized edge list
// (each undirected edge contributes both ordered pairs).
double assortativity(const NetworkGraph& g);

// Maximum hop distance from `root`; requires a radial graph.
int max_depth(const NetworkGraph& g, int root);

// |edges(g1) ∩ edges(g2)| / N_e(g1), edges compared as unordered index pairs
// with phase labels ignored. Requires equal node counts.
double overlap_ratio(const NetworkGraph& g1, const NetworkGraph& g2);

struct PhaseViolation {
  enum class Kind { EdgePhaseNotSubset, LoadPhaseMismatch };
  Kind kind;
  int edge_index = -1;  // offending edge (EdgePhaseNotSubset)
  int node_index = -1;  // offending load node (LoadPhaseMismatch)
  std::string detail;
};

// Empty iff every child edge's phase set is a subset of its parent edge's and
// every load node's phase equals its upstream edge's phase. Root is node 0.
std::vector<PhaseViolation> validate_radial_phases(const NetworkGraph& g);

// All single-graph indices bundled; overlap_ratio is left at 0.
TopoIndices topo_indices(const NetworkGraph& g, int root = 0);

}  // namespace gridforge::netmodel

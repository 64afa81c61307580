// Shared helpers for unit tests.
#pragma once

#include <utility>
#include <vector>

#include "gridforge/netmodel/network.hpp"

namespace gftest {

using gridforge::netmodel::ConductorCatalog;
using gridforge::netmodel::ConductorSpec;
using gridforge::netmodel::EdgeRecord;
using gridforge::netmodel::NetworkGraph;
using gridforge::netmodel::NodeKind;
using gridforge::netmodel::NodeRecord;
using gridforge::netmodel::Phase;

// All-three-phase graph over the given undirected edge pairs; node 0 is the
// substation, every other node a junction.
inline NetworkGraph make_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges,
                               const char* conductor = "OH-1") {
  NetworkGraph g;
  for (int i = 0; i < n_nodes; ++i)
    g.nodes.push_back({i, Phase::ABC, i == 0 ? NodeKind::Substation : NodeKind::Junction});
  for (auto [a, b] : edges) g.edges.push_back({a, b, Phase::ABC, conductor, 0.1});
  return g;
}

inline ConductorCatalog make_catalog() {
  ConductorCatalog cat;
  ConductorSpec three;
  three.phases_supported = Phase::ABC;
  three.resistance_ohm_per_mile = 0.3;
  three.reactance_ohm_per_mile = 0.6;
  three.ampacity_a = 400.0;
  cat.entries["OH-1"] = three;
  ConductorSpec single = three;
  single.phases_supported = Phase::A;
  single.ampacity_a = 150.0;
  cat.entries["UG-1"] = single;
  return cat;
}

}  // namespace gftest

// Random-walk sampling over a network.
//
// A walk is a T-step sequence of (node, phase, conductor) records. The first
// step carries the start node's phase and no conductor; every later step
// carries the labels of the edge traversed into that node. A restart jumps
// the walker back to its start node and is recorded like a walk start (no
// conductor), so traversal steps and teleports stay distinguishable.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridforge/common/rng.hpp"
#include "gridforge/netmodel/network.hpp"

namespace gridforge::walks {

struct WalkStep {
  int node = 0;
  netmodel::Phase phase = netmodel::Phase::ABC;
  std::string conductor_code;  // empty = no conductor (start or restart step)
};

struct RandomWalk {
  std::vector<WalkStep> steps;
  int length() const { return static_cast<int>(steps.size()); }
};

struct WalkConfig {
  int walk_length = 16;
  int walks_per_batch = 2000;
  double restart_probability = 0.05;
  std::uint64_t rng_seed = 1;
};

// One walk of cfg.walk_length steps. The start node is drawn uniformly from
// all nodes; each move picks uniformly among edges incident to the current
// node (the edge just traversed included).
RandomWalk sample_walk(const netmodel::NetworkGraph& graph, const WalkConfig& cfg, Rng& rng);

// Variant with a fixed start node (used by tests and by samplers that stratify
// the start distribution themselves).
RandomWalk sample_walk_from(const netmodel::NetworkGraph& graph, const WalkConfig& cfg,
                            int start_node, Rng& rng);

}  // namespace gridforge::walks

#include "gridforge/walks/walk.hpp"

namespace gridforge::walks {

using netmodel::NetworkGraph;

RandomWalk sample_walk_from(const NetworkGraph& graph, const WalkConfig& cfg,
                            int start_node, Rng& rng) {
  if (cfg.walk_length < 2) throw ConfigError("walk_length must be >= 2");
  if (start_node < 0 || start_node >= graph.n_nodes())
    throw InvalidInputError("walk start node out of range");
  const auto incident = graph.incident_edges();
  if (incident[start_node].empty())
    throw StructureError("walk started at isolated node " + std::to_string(start_node));

  RandomWalk walk;
  walk.steps.reserve(cfg.walk_length);
  walk.steps.push_back({start_node, graph.nodes[start_node].phase, ""});
  int current = start_node;
  for (int t = 1; t < cfg.walk_length; ++t) {
    if (cfg.restart_probability > 0.0 && rng.uniform() < cfg.restart_probability) {
      current = start_node;
      walk.steps.push_back({current, graph.nodes[current].phase, ""});
      continue;
    }
    const auto& options = incident[current];
    if (options.empty())
      throw StructureError("walk stranded at isolated node " + std::to_string(current));
    const int edge_idx = options[rng.uniform_int(static_cast<int>(options.size()))];
    const auto& edge = graph.edges[edge_idx];
    current = (edge.from_node == current) ? edge.to_node : edge.from_node;
    walk.steps.push_back({current, edge.phase, edge.conductor_code});
  }
  return walk;
}

RandomWalk sample_walk(const NetworkGraph& graph, const WalkConfig& cfg, Rng& rng) {
  if (graph.n_nodes() == 0) throw InvalidInputError("cannot walk an empty graph");
  const int start = rng.uniform_int(graph.n_nodes());
  return sample_walk_from(graph, cfg, start, rng);
}

}  // namespace gridforge::walks

// Connectivity scores harvested from generated walks, and the spanning-tree
// extraction that turns them into a provisional topology.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gridforge/netmodel/network.hpp"
#include "gridforge/uggan/train.hpp"

namespace gridforge::uggan {

struct ScoreRow {
  int node_a = 0;  // node_a < node_b
  int node_b = 0;
  std::array<double, 3> q{{0.0, 0.0, 0.0}};  // per-phase scores in [0, 1]
  std::vector<std::int64_t> conductor_votes; // per channel (0 = none)
  std::int64_t pair_count = 0;
};

struct ScoreMatrix {
  std::vector<ScoreRow> rows;  // unique candidate pairs, sorted by (a, b)
  int n_nodes = 0;
  int n_channels = 0;
};

// Generates `n_walks` hard walks and counts consecutive traversal pairs.
// A pair contributes to every phase in its step's phase set; pairs whose
// arriving step carries no conductor (restart markers) and self-pairs are
// not connectivity evidence and are skipped. Scores are counters normalized
// by the maximum pair count. Deterministic for a fixed seed.
ScoreMatrix assemble_score_matrix(const TrainedModel& model, int n_walks,
                                  std::uint64_t seed);

// Maximum-weight spanning tree over the aggregate per-pair score
// (qA + qB + qC). Each chosen edge carries its argmax conductor vote and a
// provisional phase: the per-phase score pattern thresholded at 0.5 (relative
// fallbacks keep the tag representable). Node phases are provisional ABC;
// final phases are the assignment module's job.
netmodel::NetworkGraph extract_topology(const ScoreMatrix& scores, int n_nodes,
                                        const netmodel::ConductorCatalog& catalog);

// CSV: from,to,qA,qB,qC,top_conductor.
void save_score_matrix(const ScoreMatrix& scores,
                       const netmodel::ConductorCatalog& catalog,
                       const std::filesystem::path& path);

}  // namespace gridforge::uggan

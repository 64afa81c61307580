#include "gridforge/uggan/score_matrix.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "gridforge/common/io_util.hpp"

namespace gridforge::uggan {

using netmodel::ConductorCatalog;
using netmodel::NetworkGraph;
using netmodel::NodeKind;
using netmodel::Phase;

namespace {

struct PairTally {
  std::array<std::int64_t, 3> phase{{0, 0, 0}};
  std::vector<std::int64_t> conductor;
  std::int64_t total = 0;
};

int phase_set_of_row(int row) {
  switch (row) {
    case 0: return 1;  // A
    case 1: return 2;  // B
    case 2: return 4;  // C
    default: return 7; // ABC
  }
}

}  // namespace

ScoreMatrix assemble_score_matrix(const TrainedModel& model, int n_walks,
                                  std::uint64_t seed) {
  if (n_walks < 1) throw InvalidInputError("assemble_score_matrix: n_walks must be >= 1");
  const int n_nodes = model.n_nodes;
  const int n_channels = model.n_channels;
  const int n_steps = model.walk_length;

  std::map<std::pair<int, int>, PairTally> tallies;
  Rng rng(seed);
  const int batch = 256;
  int remaining = n_walks;
  while (remaining > 0) {
    const int take = std::min(batch, remaining);
    remaining -= take;
    auto roll = generate_rollout(model.gen, take, n_steps, model.cfg.tau_end,
                                 SampleMode::Hard, rng, false);
    for (int b = 0; b < take; ++b) {
      for (int t = 1; t < n_steps; ++t) {
        const int flat_prev = roll.token_idx[t - 1][b];
        const int flat = roll.token_idx[t][b];
        const int channel = flat % n_channels;
        if (channel == 0) continue;  // restart marker, not a traversal
        const int node = (flat / n_channels) % n_nodes;
        const int node_prev = (flat_prev / n_channels) % n_nodes;
        if (node == node_prev) continue;
        const int phase_row = flat / (n_channels * n_nodes);
        auto& tally = tallies[std::minmax(node_prev, node)];
        if (tally.conductor.empty()) tally.conductor.assign(n_channels, 0);
        const int mask = phase_set_of_row(phase_row);
        for (int p = 0; p < 3; ++p)
          if (mask & (1 << p)) ++tally.phase[p];
        ++tally.conductor[channel];
        ++tally.total;
      }
    }
  }

  std::int64_t max_count = 0;
  for (const auto& [pair, tally] : tallies) max_count = std::max(max_count, tally.total);

  ScoreMatrix scores;
  scores.n_nodes = n_nodes;
  scores.n_channels = n_channels;
  for (const auto& [pair, tally] : tallies) {
    ScoreRow row;
    row.node_a = pair.first;
    row.node_b = pair.second;
    for (int p = 0; p < 3; ++p)
      row.q[p] = max_count > 0 ? static_cast<double>(tally.phase[p]) / max_count : 0.0;
    row.conductor_votes = tally.conductor;
    row.pair_count = tally.total;
    scores.rows.push_back(std::move(row));
  }
  return scores;
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

NetworkGraph extract_topology(const ScoreMatrix& scores, int n_nodes,
                              const ConductorCatalog& catalog) {
  const auto channels = walks::conductor_channels(catalog);
  if (static_cast<int>(channels.size()) != scores.n_channels)
    throw CatalogError("extract_topology: catalog channel count mismatch");

  std::vector<const ScoreRow*> candidates;
  for (const auto& row : scores.rows)
    if (row.q[0] + row.q[1] + row.q[2] > 0.0) candidates.push_back(&row);
  std::sort(candidates.begin(), candidates.end(), [](const ScoreRow* a, const ScoreRow* b) {
    const double sa = a->q[0] + a->q[1] + a->q[2];
    const double sb = b->q[0] + b->q[1] + b->q[2];
    if (sa != sb) return sa > sb;
    if (a->node_a != b->node_a) return a->node_a < b->node_a;
    return a->node_b < b->node_b;
  });

  UnionFind uf(n_nodes);
  std::vector<const ScoreRow*> chosen;
  for (const ScoreRow* row : candidates)
    if (uf.unite(row->node_a, row->node_b)) chosen.push_back(row);

  if (static_cast<int>(chosen.size()) != n_nodes - 1) {
    const int root_comp = uf.find(0);
    std::string unreachable;
    for (int v = 0; v < n_nodes; ++v)
      if (uf.find(v) != root_comp) unreachable += " " + std::to_string(v);
    throw StructureError("extract_topology: candidate graph does not span all nodes;"
                         " unreachable:" + unreachable);
  }

  NetworkGraph g;
  for (int v = 0; v < n_nodes; ++v)
    g.nodes.push_back({v, Phase::ABC, v == 0 ? NodeKind::Substation : NodeKind::Junction});
  for (const ScoreRow* row : chosen) {
    netmodel::EdgeRecord e;
    e.from_node = row->node_a;
    e.to_node = row->node_b;

    // Provisional phase: per-phase scores thresholded at 0.5; fall back to the
    // argmax phase when the pattern is empty, promote to ABC when it is not a
    // representable single tag.
    int mask = 0;
    for (int p = 0; p < 3; ++p)
      if (row->q[p] > 0.5) mask |= 1 << p;
    if (mask == 0) {
      int best = 0;
      for (int p = 1; p < 3; ++p)
        if (row->q[p] > row->q[best]) best = p;
      mask = 1 << best;
    }
    auto tag = netmodel::phase_from_mask(mask);
    e.phase = tag ? *tag : Phase::ABC;

    // Argmax conductor vote over real channels.
    int best_channel = 1;
    for (int ch = 2; ch < scores.n_channels; ++ch)
      if (row->conductor_votes[ch] > row->conductor_votes[best_channel]) best_channel = ch;
    e.conductor_code = channels[best_channel];
    e.length_mi = 0.0;  // lengths are assigned downstream from catalog statistics
    g.edges.push_back(std::move(e));
  }
  return g;
}

void save_score_matrix(const ScoreMatrix& scores, const ConductorCatalog& catalog,
                       const std::filesystem::path& path) {
  const auto channels = walks::conductor_channels(catalog);
  std::ostringstream out;
  out << "from,to,qA,qB,qC,top_conductor\n";
  for (const auto& row : scores.rows) {
    int best_channel = 1;
    for (int ch = 2; ch < scores.n_channels; ++ch)
      if (row.conductor_votes[ch] > row.conductor_votes[best_channel]) best_channel = ch;
    out << row.node_a << ',' << row.node_b << ',' << format_double(row.q[0]) << ','
        << format_double(row.q[1]) << ',' << format_double(row.q[2]) << ','
        << channels[best_channel] << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace gridforge::uggan

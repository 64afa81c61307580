// One-hot walk tensors.
//
// A walk of T steps encodes as a binary tensor of shape
// (4 phase rows) x (N_n node columns) x (N_c conductor channels) x (T steps)
// with exactly one active entry per step. Rows are ordered [A, B, C, ABC];
// channel 0 is reserved for "no conductor" (start and restart steps), and
// channels 1..N_c-1 map to catalog codes in lexicographic order.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "gridforge/common/linalg.hpp"
#include "gridforge/walks/walk.hpp"

namespace gridforge::walks {

// Catalog codes in channel order (index 0 is the reserved empty code).
std::vector<std::string> conductor_channels(const netmodel::ConductorCatalog& catalog);

class WalkTensor {
public:
  WalkTensor(int n_nodes, int n_channels, int n_steps)
      : n_nodes_(n_nodes), n_channels_(n_channels), flat_(n_steps, -1) {}

  static constexpr int kPhaseRows = 4;

  int n_nodes() const { return n_nodes_; }
  int n_channels() const { return n_channels_; }
  int n_steps() const { return static_cast<int>(flat_.size()); }
  int token_dim() const { return kPhaseRows * n_nodes_ * n_channels_; }

  // Flat index of the active entry of step s: (phase*N_n + node)*N_c + channel.
  std::int32_t flat(int s) const { return flat_[s]; }
  void set(int s, int phase_row, int node, int channel);
  void set_flat(int s, std::int32_t flat);

  int phase_row(int s) const { return flat_[s] / (n_nodes_ * n_channels_); }
  int node(int s) const { return (flat_[s] / n_channels_) % n_nodes_; }
  int channel(int s) const { return flat_[s] % n_channels_; }

  // Dense one-hot column for step s (length token_dim()).
  Vec dense_step(int s) const;

private:
  int n_nodes_;
  int n_channels_;
  std::vector<std::int32_t> flat_;
};

WalkTensor encode_walk(const RandomWalk& walk, int n_nodes,
                       const netmodel::ConductorCatalog& catalog);

RandomWalk decode_walk(const WalkTensor& tensor, const netmodel::ConductorCatalog& catalog);

// Inverse of encode for one dense step slice; throws MalformedTensorError
// unless exactly one entry equals 1 and the rest are 0.
std::tuple<int, netmodel::Phase, std::string> decode_step(
    const Vec& slice, int n_nodes, const netmodel::ConductorCatalog& catalog);

// Deterministic corpus: walk i draws from substream (cfg.rng_seed, i).
std::vector<WalkTensor> sample_corpus(const netmodel::NetworkGraph& graph,
                                      const netmodel::ConductorCatalog& catalog,
                                      const WalkConfig& cfg);

// JSON-lines cache: a header object with (n_nodes, n_channels, walk_length,
// seed), then one line per walk as [[phase,node,channel], ...].
void save_corpus(const std::vector<WalkTensor>& corpus, const WalkConfig& cfg,
                 const std::filesystem::path& path);
std::vector<WalkTensor> load_corpus(const std::filesystem::path& path);

}  // namespace gridforge::walks

#include "gridforge/walks/encoding.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridforge/common/io_util.hpp"

namespace gridforge::walks {

using netmodel::ConductorCatalog;
using netmodel::NetworkGraph;
using netmodel::Phase;
using nlohmann::json;

std::vector<std::string> conductor_channels(const ConductorCatalog& catalog) {
  std::vector<std::string> channels{""};
  for (const auto& [code, spec] : catalog.entries) channels.push_back(code);  // map is sorted
  return channels;
}

void WalkTensor::set(int s, int phase_row, int node, int channel) {
  if (phase_row < 0 || phase_row >= kPhaseRows || node < 0 || node >= n_nodes_ ||
      channel < 0 || channel >= n_channels_)
    throw InvalidInputError("WalkTensor::set: index out of range");
  flat_[s] = static_cast<std::int32_t>((phase_row * n_nodes_ + node) * n_channels_ + channel);
}

void WalkTensor::set_flat(int s, std::int32_t flat) {
  if (flat < 0 || flat >= token_dim())
    throw InvalidInputError("WalkTensor::set_flat: index out of range");
  flat_[s] = flat;
}

Vec WalkTensor::dense_step(int s) const {
  Vec v = Vec::Zero(token_dim());
  if (flat_[s] >= 0) v[flat_[s]] = 1.0;
  return v;
}

namespace {
int phase_to_row(Phase p) { return static_cast<int>(p); }  // A=0,B=1,C=2,ABC=3

int channel_of(const std::vector<std::string>& channels, const std::string& code) {
  for (int i = 0; i < static_cast<int>(channels.size()); ++i)
    if (channels[i] == code) return i;
  return -1;
}
}  // namespace

WalkTensor encode_walk(const RandomWalk& walk, int n_nodes, const ConductorCatalog& catalog) {
  const auto channels = conductor_channels(catalog);
  WalkTensor tensor(n_nodes, static_cast<int>(channels.size()), walk.length());
  for (int s = 0; s < walk.length(); ++s) {
    const auto& step = walk.steps[s];
    if (step.node < 0 || step.node >= n_nodes)
      throw InvalidInputError("encode_walk: node index out of range");
    const int channel = channel_of(channels, step.conductor_code);
    if (channel < 0) throw CatalogError("encode_walk: unknown conductor code: " + step.conductor_code);
    tensor.set(s, phase_to_row(step.phase), step.node, channel);
  }
  return tensor;
}

RandomWalk decode_walk(const WalkTensor& tensor, const ConductorCatalog& catalog) {
  const auto channels = conductor_channels(catalog);
  if (static_cast<int>(channels.size()) != tensor.n_channels())
    throw CatalogError("decode_walk: catalog channel count mismatch");
  RandomWalk walk;
  walk.steps.reserve(tensor.n_steps());
  for (int s = 0; s < tensor.n_steps(); ++s) {
    if (tensor.flat(s) < 0) throw MalformedTensorError("decode_walk: unset step");
    WalkStep step;
    step.node = tensor.node(s);
    step.phase = static_cast<Phase>(tensor.phase_row(s));
    step.conductor_code = channels[tensor.channel(s)];
    walk.steps.push_back(step);
  }
  return walk;
}

std::tuple<int, Phase, std::string> decode_step(const Vec& slice, int n_nodes,
                                                const ConductorCatalog& catalog) {
  const auto channels = conductor_channels(catalog);
  const int n_channels = static_cast<int>(channels.size());
  if (slice.size() != static_cast<Eigen::Index>(WalkTensor::kPhaseRows) * n_nodes * n_channels)
    throw MalformedTensorError("decode_step: slice has wrong length");
  int hot = -1;
  for (Eigen::Index i = 0; i < slice.size(); ++i) {
    if (slice[i] == 0.0) continue;
    if (slice[i] != 1.0) throw MalformedTensorError("decode_step: entry is neither 0 nor 1");
    if (hot >= 0) throw MalformedTensorError("decode_step: multiple active entries");
    hot = static_cast<int>(i);
  }
  if (hot < 0) throw MalformedTensorError("decode_step: all-zero slice");
  const int channel = hot % n_channels;
  const int node = (hot / n_channels) % n_nodes;
  const int phase_row = hot / (n_channels * n_nodes);
  return {node, static_cast<Phase>(phase_row), channels[channel]};
}

std::vector<WalkTensor> sample_corpus(const NetworkGraph& graph,
                                      const ConductorCatalog& catalog,
                                      const WalkConfig& cfg) {
  std::vector<WalkTensor> corpus;
  corpus.reserve(cfg.walks_per_batch);
  for (int i = 0; i < cfg.walks_per_batch; ++i) {
    Rng rng = Rng::substream(cfg.rng_seed, static_cast<std::uint64_t>(i));
    corpus.push_back(encode_walk(sample_walk(graph, cfg, rng), graph.n_nodes(), catalog));
  }
  return corpus;
}

void save_corpus(const std::vector<WalkTensor>& corpus, const WalkConfig& cfg,
                 const std::filesystem::path& path) {
  std::ostringstream out;
  if (corpus.empty()) throw InvalidInputError("save_corpus: empty corpus");
  json header{{"n_nodes", corpus.front().n_nodes()},
              {"n_channels", corpus.front().n_channels()},
              {"walk_length", corpus.front().n_steps()},
              {"seed", cfg.rng_seed}};
  out << header.dump() << "\n";
  for (const auto& tensor : corpus) {
    json walk = json::array();
    for (int s = 0; s < tensor.n_steps(); ++s)
      walk.push_back({tensor.phase_row(s), tensor.node(s), tensor.channel(s)});
    out << walk.dump() << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<WalkTensor> load_corpus(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError("corpus file is empty: " + path.string());
  json header = json::parse(line);
  const int n_nodes = header.at("n_nodes").get<int>();
  const int n_channels = header.at("n_channels").get<int>();
  const int walk_length = header.at("walk_length").get<int>();
  std::vector<WalkTensor> corpus;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json walk = json::parse(line);
    if (static_cast<int>(walk.size()) != walk_length)
      throw DataError("corpus walk length mismatch");
    WalkTensor tensor(n_nodes, n_channels, walk_length);
    for (int s = 0; s < walk_length; ++s)
      tensor.set(s, walk[s][0].get<int>(), walk[s][1].get<int>(), walk[s][2].get<int>());
    corpus.push_back(std::move(tensor));
  }
  return corpus;
}

}  // namespace gridforge::walks

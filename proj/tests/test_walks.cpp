#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "gridforge/walks/encoding.hpp"
#include "test_util.hpp"

using namespace gridforge;
using namespace gridforge::walks;
using gftest::make_catalog;
using gftest::make_graph;
using netmodel::Phase;

namespace {

// The 8-node radial example network (0-indexed): node 2 has three incident
// edges, nodes 4 and 7 sit on short dead ends.
netmodel::NetworkGraph demo8() {
  return make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 5}, {5, 6}, {6, 7}});
}

bool is_traversal_consistent(const netmodel::NetworkGraph& g, const RandomWalk& walk) {
  std::set<std::pair<int, int>> edges;
  for (const auto& e : g.edges) edges.insert(std::minmax(e.from_node, e.to_node));
  for (int s = 1; s < walk.length(); ++s) {
    if (walk.steps[s].conductor_code.empty()) continue;  // restart marker
    auto pair = std::minmax(walk.steps[s - 1].node, walk.steps[s].node);
    if (!edges.count(pair)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("two-node graph alternates deterministically") {
  auto g = make_graph(2, {{0, 1}});
  WalkConfig cfg;
  cfg.walk_length = 4;
  cfg.restart_probability = 0.0;
  Rng rng(1);
  auto walk = sample_walk(g, cfg, rng);
  REQUIRE(walk.length() == 4);
  for (int s = 1; s < 4; ++s) CHECK(walk.steps[s].node != walk.steps[s - 1].node);
}

TEST_CASE("every consecutive traversal pair is a graph edge") {
  auto g = demo8();
  WalkConfig cfg;
  cfg.walk_length = 16;
  cfg.restart_probability = 0.2;  // force restarts into the sample
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    auto walk = sample_walk(g, cfg, rng);
    CHECK(is_traversal_consistent(g, walk));
  }
}

TEST_CASE("incident edges are chosen uniformly at a degree-3 node") {
  auto g = demo8();
  WalkConfig cfg;
  cfg.walk_length = 2;
  cfg.restart_probability = 0.0;
  Rng rng(7);
  // Start at node 2 every time; first move must split 1/3 : 1/3 : 1/3.
  std::map<int, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    auto walk = sample_walk_from(g, cfg, 2, rng);
    ++counts[walk.steps[1].node];
  }
  REQUIRE(counts.size() == 3);
  for (auto [node, c] : counts) {
    (void)node;
    const double expected = n / 3.0;
    const double stderr3 = 3.0 * std::sqrt(expected * (1.0 - 1.0 / 3.0));
    CHECK(std::abs(c - expected) < stderr3);
  }
}

TEST_CASE("star graph first-step frequencies are uniform") {
  const int leaves = 6;
  auto g = make_graph(leaves + 1,
                      {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}});
  WalkConfig cfg;
  cfg.walk_length = 2;
  cfg.restart_probability = 0.0;
  Rng rng(11);
  std::map<int, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto walk = sample_walk_from(g, cfg, 0, rng);
    ++counts[walk.steps[1].node];
  }
  // Chi-square goodness of fit against uniform, 5 dof, 99% quantile 15.09.
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / leaves;
  for (auto [node, c] : counts) {
    (void)node;
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi2 < 15.09);
}

TEST_CASE("walk start errors") {
  netmodel::NetworkGraph g = make_graph(3, {{0, 1}});  // node 2 isolated
  WalkConfig cfg;
  Rng rng(5);
  CHECK_THROWS_AS(sample_walk_from(g, cfg, 2, rng), StructureError);
  cfg.walk_length = 1;
  CHECK_THROWS_AS(sample_walk_from(g, cfg, 0, rng), ConfigError);
}

TEST_CASE("encode and decode round trip") {
  auto g = demo8();
  auto cat = make_catalog();
  WalkConfig cfg;
  cfg.walk_length = 12;
  cfg.restart_probability = 0.1;
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    auto walk = sample_walk(g, cfg, rng);
    auto tensor = encode_walk(walk, g.n_nodes(), cat);
    auto back = decode_walk(tensor, cat);
    REQUIRE(back.length() == walk.length());
    for (int s = 0; s < walk.length(); ++s) {
      CHECK(back.steps[s].node == walk.steps[s].node);
      CHECK(back.steps[s].phase == walk.steps[s].phase);
      CHECK(back.steps[s].conductor_code == walk.steps[s].conductor_code);
    }
  }
}

TEST_CASE("tensor one-hot structure") {
  auto cat = make_catalog();
  RandomWalk walk;
  walk.steps.push_back({1, Phase::ABC, ""});
  walk.steps.push_back({2, Phase::A, "UG-1"});
  auto tensor = encode_walk(walk, 6, cat);
  // Step 0: row ABC (index 3), column 1, channel 0.
  const int n_channels = tensor.n_channels();
  CHECK(tensor.phase_row(0) == 3);
  CHECK(tensor.node(0) == 1);
  CHECK(tensor.channel(0) == 0);
  CHECK(tensor.flat(0) == (3 * 6 + 1) * n_channels + 0);
  // Dense sum over all entries equals the number of steps.
  double total = 0.0;
  for (int s = 0; s < tensor.n_steps(); ++s) total += tensor.dense_step(s).sum();
  CHECK(total == doctest::Approx(2.0));
}

TEST_CASE("decode_step recognizes malformed slices") {
  auto cat = make_catalog();
  const int n_nodes = 8;
  const int dim = 4 * n_nodes * 3;
  Vec slice = Vec::Zero(dim);
  CHECK_THROWS_AS(decode_step(slice, n_nodes, cat), MalformedTensorError);
  slice[4] = 1.0;  // phase row 0, node 1, channel 1
  auto [node, phase, code] = decode_step(slice, n_nodes, cat);
  CHECK(node == 1);
  CHECK(phase == Phase::A);
  CHECK(code == "OH-1");  // channel order: "", OH-1, UG-1
  slice[9] = 1.0;
  CHECK_THROWS_AS(decode_step(slice, n_nodes, cat), MalformedTensorError);
  slice[9] = 0.0;
  slice[4] = 0.7;
  CHECK_THROWS_AS(decode_step(slice, n_nodes, cat), MalformedTensorError);
}

TEST_CASE("corpus determinism and coverage") {
  auto g = demo8();
  auto cat = make_catalog();
  WalkConfig cfg;
  cfg.walk_length = 16;
  cfg.walks_per_batch = 500;
  cfg.rng_seed = 77;
  auto c1 = sample_corpus(g, cat, cfg);
  auto c2 = sample_corpus(g, cat, cfg);
  REQUIRE(c1.size() == c2.size());
  for (size_t i = 0; i < c1.size(); ++i)
    for (int s = 0; s < c1[i].n_steps(); ++s) CHECK(c1[i].flat(s) == c2[i].flat(s));

  // All 7 edges appear somewhere in the corpus.
  std::set<std::pair<int, int>> seen;
  for (const auto& tensor : c1) {
    for (int s = 1; s < tensor.n_steps(); ++s) {
      if (tensor.channel(s) == 0) continue;
      seen.insert(std::minmax(tensor.node(s - 1), tensor.node(s)));
    }
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("corpus cache round trip") {
  auto g = demo8();
  auto cat = make_catalog();
  WalkConfig cfg;
  cfg.walk_length = 8;
  cfg.walks_per_batch = 20;
  cfg.rng_seed = 5;
  auto corpus = sample_corpus(g, cat, cfg);
  auto path = std::filesystem::temp_directory_path() / "gf_corpus_test.jsonl";
  save_corpus(corpus, cfg, path);
  auto back = load_corpus(path);
  REQUIRE(back.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i)
    for (int s = 0; s < corpus[i].n_steps(); ++s) CHECK(back[i].flat(s) == corpus[i].flat(s));
  std::filesystem::remove(path);
}

TEST_CASE("edge visit frequencies match the uniform-walk stationary law") {
  // Directed edge traversal frequency of the uniform walk is 1/(2m) per
  // directed edge; time averages converge on any connected graph.
  auto g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  WalkConfig cfg;
  cfg.walk_length = 1000000;
  cfg.restart_probability = 0.0;
  Rng rng(21);
  auto walk = sample_walk_from(g, cfg, 0, rng);
  std::map<std::pair<int, int>, int> counts;
  for (int s = 1; s < walk.length(); ++s)
    ++counts[{walk.steps[s - 1].node, walk.steps[s].node}];
  const double expected = (cfg.walk_length - 1) / 8.0;  // 8 directed edges
  for (auto [pair, c] : counts) {
    (void)pair;
    CHECK(std::abs(c - expected) / expected < 0.01);
  }
}

TEST_CASE("node visit distribution approaches deg/2m") {
  // Non-bipartite fixture (triangle with a tail) sampled with no restarts.
  auto g = make_graph(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}});
  WalkConfig cfg;
  cfg.walk_length = 400000;
  cfg.restart_probability = 0.0;
  Rng rng(31);
  auto walk = sample_walk_from(g, cfg, 0, rng);
  std::vector<int> visits(5, 0);
  for (const auto& step : walk.steps) ++visits[step.node];
  auto deg = g.degrees();
  for (int v = 0; v < 5; ++v) {
    const double expected = static_cast<double>(deg[v]) / (2.0 * g.n_edges());
    const double observed = static_cast<double>(visits[v]) / walk.length();
    CHECK(std::abs(observed - expected) < 0.01);
  }
}

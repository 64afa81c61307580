#include "gridforge/netmodel/network_io.hpp"

#include <json.hpp>

#include "gridforge/common/io_util.hpp"

namespace gridforge::netmodel {

using nlohmann::json;

NetworkGraph network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("network JSON parse error: ") + e.what());
  }
  NetworkGraph g;
  for (const auto& jn : doc.at("nodes")) {
    NodeRecord node;
    node.index = jn.at("id").get<int>();
    node.phase = phase_from_string(jn.at("phase").get<std::string>());
    node.kind = node_kind_from_string(jn.at("kind").get<std::string>());
    g.nodes.push_back(node);
  }
  for (const auto& je : doc.at("edges")) {
    EdgeRecord e;
    e.from_node = je.at("from").get<int>();
    e.to_node = je.at("to").get<int>();
    e.phase = phase_from_string(je.at("phase").get<std::string>());
    e.conductor_code = je.at("conductor").get<std::string>();
    e.length_mi = je.at("length_mi").get<double>();
    g.edges.push_back(e);
  }
  validate(g);
  if (g.nodes[0].kind != NodeKind::Substation)
    throw InvalidInputError("node 0 must be the substation");
  return g;
}

std::string network_to_json(const NetworkGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"id", n.index}, {"phase", to_string(n.phase)}, {"kind", to_string(n.kind)}});
  json edges = json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"from", e.from_node},
                     {"to", e.to_node},
                     {"phase", to_string(e.phase)},
                     {"conductor", e.conductor_code},
                     {"length_mi", e.length_mi}});
  json doc{{"nodes", nodes}, {"edges", edges}};
  return doc.dump(2) + "\n";
}

NetworkGraph load_network(const std::filesystem::path& path) {
  return network_from_json(read_text_file(path));
}

void save_network(const NetworkGraph& g, const std::filesystem::path& path) {
  write_text_file(path, network_to_json(g));
}

namespace {
Eigen::Matrix3d matrix3_from_json(const json& j) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}
}  // namespace

ConductorCatalog catalog_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("catalog JSON parse error: ") + e.what());
  }
  ConductorCatalog cat;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const json& j = it.value();
    ConductorSpec spec;
    spec.phases_supported = phase_from_string(j.at("phases").get<std::string>());
    spec.resistance_ohm_per_mile = j.at("r_ohm_per_mile").get<double>();
    spec.reactance_ohm_per_mile = j.at("x_ohm_per_mile").get<double>();
    spec.ampacity_a = j.at("ampacity_a").get<double>();
    spec.is_series_device = j.value("is_series_device", false);
    if (j.contains("r_matrix")) spec.r_matrix = matrix3_from_json(j.at("r_matrix"));
    if (j.contains("x_matrix")) spec.x_matrix = matrix3_from_json(j.at("x_matrix"));
    if (spec.resistance_ohm_per_mile < 0.0 || spec.reactance_ohm_per_mile < 0.0)
      throw CatalogError("conductor " + it.key() + ": impedance must be >= 0");
    if (spec.ampacity_a <= 0.0)
      throw CatalogError("conductor " + it.key() + ": ampacity must be > 0");
    cat.entries[it.key()] = spec;
  }
  return cat;
}

std::string catalog_to_json(const ConductorCatalog& c) {
  json doc = json::object();
  for (const auto& [code, spec] : c.entries) {
    json j{{"phases", to_string(spec.phases_supported)},
           {"r_ohm_per_mile", spec.resistance_ohm_per_mile},
           {"x_ohm_per_mile", spec.reactance_ohm_per_mile},
           {"ampacity_a", spec.ampacity_a},
           {"is_series_device", spec.is_series_device}};
    doc[code] = j;
  }
  return doc.dump(2) + "\n";
}

ConductorCatalog load_catalog(const std::filesystem::path& path) {
  return catalog_from_json(read_text_file(path));
}

}  // namespace gridforge::netmodel

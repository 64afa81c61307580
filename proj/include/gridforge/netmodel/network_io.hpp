// JSON serialization of networks and conductor catalogs.
//
// Network file:
//   {"nodes":[{"id":0,"phase":"ABC","kind":"substation"},...],
//    "edges":[{"from":0,"to":1,"phase":"ABC","conductor":"OH-4/0","length_mi":0.12},...]}
// Catalog file: object keyed by conductor code.
#pragma once

#include <filesystem>
#include <string>

#include "gridforge/netmodel/network.hpp"

namespace gridforge::netmodel {

NetworkGraph network_from_json(const std::string& text);
std::string network_to_json(const NetworkGraph& g);
NetworkGraph load_network(const std::filesystem::path& path);
void save_network(const NetworkGraph& g, const std::filesystem::path& path);

ConductorCatalog catalog_from_json(const std::string& text);
std::string catalog_to_json(const ConductorCatalog& c);
ConductorCatalog load_catalog(const std::filesystem::path& path);

}  // namespace gridforge::netmodel

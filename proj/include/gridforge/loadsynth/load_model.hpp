// Clustered conditional load densities and synthetic series sampling.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridforge/loadsynth/cluster.hpp"
#include "gridforge/loadsynth/kde.hpp"
#include "gridforge/loadsynth/meters.hpp"

namespace gridforge::loadsynth {

struct NodeLoadAssignment {
  CustomerClass customer_class = CustomerClass::Residential;
  int cluster = 0;
  bool three_phase = false;
  double scale_kw = 0.0;  // class-level scale factor
};

// Default class power factors used to synthesize reactive power.
constexpr std::array<double, 3> kClassPowerFactor = {0.98, 0.95, 0.90};

struct LoadModel {
  int n_slots = 0;
  double slot_bandwidth = 1.0;
  // One KDE over (P per-unit, slot) per (class, cluster).
  std::map<std::pair<int, int>, KdeModel> kdes;
  std::array<double, 3> class_scale_kw{{0.0, 0.0, 0.0}};
  std::map<int, NodeLoadAssignment> node_assignment;  // keyed by host node
  std::map<int, ClusterModel> class_clusters;         // keyed by class, for reporting

  const KdeModel& kde_for(int node) const;
};

// Fits the full model from transformer-aggregated series: per class, profiles
// are normalized by their own mean, clustered with k chosen by minimum DBI in
// [2, min(10, n-1)], and a per-cluster KDE over (per-unit load, slot) is fit
// with Silverman bandwidth on the load axis and `slot_bandwidth` on time.
LoadModel fit_load_model(const std::vector<MeterSeries>& transformer_series,
                         const TransformerMap& tmap, int n_slots,
                         std::uint64_t seed = 1, double slot_bandwidth = 1.0);

// Per-slot draws from the conditional density; negative draws truncate to 0,
// reactive power follows the class power factor.
struct SeriesPoint {
  double p_kw = 0.0;
  double q_kvar = 0.0;
};
std::vector<SeriesPoint> sample_series(const LoadModel& model, int node, int n_days,
                                       Rng& rng);

// DG output as negative load, clustered by scenario label.
struct DgScenarioModel {
  KdeModel kde;  // over (output kW, slot)
};
std::map<std::string, DgScenarioModel> fit_dg_model(
    const std::vector<MeterSeries>& output_series,
    const std::map<std::string, std::string>& scenario_of);

// Draws one injection for a slot; the result is <= 0 (negative load). Slots
// whose training data is identically zero yield exactly 0.
double sample_dg_injection(const DgScenarioModel& model, int slot, Rng& rng);

}  // namespace gridforge::loadsynth

#include "gridforge/loadsynth/load_model.hpp"

#include <algorithm>
#include <cmath>

namespace gridforge::loadsynth {

const KdeModel& LoadModel::kde_for(int node) const {
  auto it = node_assignment.find(node);
  if (it == node_assignment.end())
    throw DataError("no load assignment for node " + std::to_string(node));
  auto kit = kdes.find({static_cast<int>(it->second.customer_class), it->second.cluster});
  if (kit == kdes.end())
    throw DataError("missing KDE for node " + std::to_string(node));
  return kit->second;
}

namespace {

// Mean daily profile (n_slots) of one series; sample order is day-major.
Vec mean_profile(const MeterSeries& series, int n_slots) {
  Vec sums = Vec::Zero(n_slots);
  Vec counts = Vec::Zero(n_slots);
  for (const auto& s : series.samples) {
    if (s.slot < 0 || s.slot >= n_slots)
      throw DataError("meter " + series.meter_id + ": slot out of range");
    sums[s.slot] += s.p_kw;
    counts[s.slot] += 1.0;
  }
  for (int s = 0; s < n_slots; ++s)
    if (counts[s] > 0) sums[s] /= counts[s];
  return sums;
}

}  // namespace

LoadModel fit_load_model(const std::vector<MeterSeries>& transformer_series,
                         const TransformerMap& tmap, int n_slots, std::uint64_t seed,
                         double slot_bandwidth) {
  if (n_slots < 1) throw ConfigError("fit_load_model: n_slots must be >= 1");
  LoadModel model;
  model.n_slots = n_slots;
  model.slot_bandwidth = slot_bandwidth;

  struct Member {
    const MeterSeries* series;
    double mean_kw;
  };
  std::array<std::vector<Member>, 3> by_class;
  for (const auto& series : transformer_series) {
    double mean = 0.0;
    for (const auto& s : series.samples) mean += s.p_kw;
    if (series.samples.empty() || mean <= 0.0)
      throw DataError("transformer " + series.meter_id + " has no positive consumption");
    mean /= series.samples.size();
    by_class[static_cast<int>(series.customer_class)].push_back({&series, mean});
  }

  std::map<std::string, std::pair<int, int>> cluster_of_transformer;  // -> (class, cluster)
  for (int cls = 0; cls < 3; ++cls) {
    auto& members = by_class[cls];
    if (members.empty()) continue;
    model.class_scale_kw[cls] = 0.0;
    for (const auto& m : members) model.class_scale_kw[cls] += m.mean_kw;
    model.class_scale_kw[cls] /= members.size();

    std::vector<int> cluster_ids(members.size(), 0);
    if (members.size() >= 3) {
      Mat profiles(members.size(), n_slots);
      for (size_t i = 0; i < members.size(); ++i)
        profiles.row(i) = (mean_profile(*members[i].series, n_slots) / members[i].mean_kw)
                              .transpose();
      const int k_max = std::min<int>(10, static_cast<int>(members.size()) - 1);
      try {
        auto clustering = cluster_profiles(profiles, 2, k_max, seed + cls);
        cluster_ids = clustering.memberships;
        model.class_clusters[cls] = clustering;
      } catch (const DataError&) {
        // Degenerate class (identical shapes): keep one cluster.
      }
    }
    for (size_t i = 0; i < members.size(); ++i)
      cluster_of_transformer[members[i].series->meter_id] = {cls, cluster_ids[i]};

    // KDE per cluster over (per-unit load, slot).
    std::map<int, std::vector<std::pair<double, double>>> rows;
    for (size_t i = 0; i < members.size(); ++i) {
      for (const auto& s : members[i].series->samples)
        rows[cluster_ids[i]].push_back({s.p_kw / members[i].mean_kw, double(s.slot)});
    }
    for (auto& [cluster, data] : rows) {
      Mat samples(data.size(), 2);
      for (size_t i = 0; i < data.size(); ++i) {
        samples(i, 0) = data[i].first;
        samples(i, 1) = data[i].second;
      }
      // Silverman on the load axis, fixed bandwidth on the slot axis.
      const int n = static_cast<int>(samples.rows());
      const double mean = samples.col(0).mean();
      const double var = n > 1 ? (samples.col(0).array() - mean).square().sum() / (n - 1) : 0.0;
      Vec bw(2);
      bw[0] = var > 0.0 ? 1.06 * std::sqrt(var) * std::pow(n, -0.2) : 0.01;
      bw[1] = slot_bandwidth;
      model.kdes[{cls, cluster}] = fit_kde(samples, bw);
    }
  }

  for (const auto& [tid, rec] : tmap.transformers) {
    auto it = cluster_of_transformer.find(tid);
    if (it == cluster_of_transformer.end()) continue;  // transformer without series
    NodeLoadAssignment assign;
    assign.customer_class = static_cast<CustomerClass>(it->second.first);
    assign.cluster = it->second.second;
    assign.three_phase = rec.three_phase;
    assign.scale_kw = model.class_scale_kw[it->second.first];
    model.node_assignment[rec.node] = assign;
  }
  return model;
}

std::vector<SeriesPoint> sample_series(const LoadModel& model, int node, int n_days,
                                       Rng& rng) {
  auto it = model.node_assignment.find(node);
  if (it == model.node_assignment.end())
    throw DataError("sample_series: node " + std::to_string(node) + " has no assignment");
  const auto& kde = model.kde_for(node);
  const double scale = it->second.scale_kw;
  const double pf = kClassPowerFactor[static_cast<int>(it->second.customer_class)];
  const double tan_phi = std::tan(std::acos(pf));

  std::vector<Conditional1D> conditionals;
  conditionals.reserve(model.n_slots);
  for (int s = 0; s < model.n_slots; ++s)
    conditionals.push_back(conditional_density(kde, double(s)));

  std::vector<SeriesPoint> series;
  series.reserve(static_cast<size_t>(n_days) * model.n_slots);
  for (int day = 0; day < n_days; ++day) {
    for (int s = 0; s < model.n_slots; ++s) {
      double pu = conditionals[s].sample(rng);
      if (pu < 0.0) pu = 0.0;  // loads are consumption
      const double p = pu * scale;
      series.push_back({p, p * tan_phi});
    }
  }
  return series;
}

std::map<std::string, DgScenarioModel> fit_dg_model(
    const std::vector<MeterSeries>& output_series,
    const std::map<std::string, std::string>& scenario_of) {
  std::map<std::string, std::vector<const MeterSeries*>> groups;
  for (const auto& series : output_series) {
    auto it = scenario_of.find(series.meter_id);
    if (it == scenario_of.end())
      throw ConfigError("fit_dg_model: series " + series.meter_id + " has no scenario label");
    groups[it->second].push_back(&series);
  }
  if (groups.empty()) throw ConfigError("fit_dg_model: no scenarios");

  std::map<std::string, DgScenarioModel> models;
  for (const auto& [scenario, members] : groups) {
    size_t total = 0;
    for (const auto* m : members) total += m->samples.size();
    if (total == 0) throw ConfigError("fit_dg_model: scenario " + scenario + " is empty");
    Mat samples(total, 2);
    size_t row = 0;
    for (const auto* m : members)
      for (const auto& s : m->samples) {
        samples(row, 0) = s.p_kw;
        samples(row, 1) = double(s.slot);
        ++row;
      }
    const int n = static_cast<int>(samples.rows());
    const double mean = samples.col(0).mean();
    const double var = n > 1 ? (samples.col(0).array() - mean).square().sum() / (n - 1) : 0.0;
    Vec bw(2);
    bw[0] = var > 0.0 ? 1.06 * std::sqrt(var) * std::pow(n, -0.2) : 0.01;
    bw[1] = 1.0;
    models[scenario] = {fit_kde(samples, bw)};
  }
  return models;
}

double sample_dg_injection(const DgScenarioModel& model, int slot, Rng& rng) {
  auto cond = conditional_density(model.kde, double(slot));
  // Degenerate conditional: essentially all mass sits on zero-output kernels
  // (e.g. PV at night), so the slot's output is exactly zero.
  double nonzero_weight = 0.0;
  for (Eigen::Index i = 0; i < cond.centers.size(); ++i)
    if (std::abs(cond.centers[i]) > 1e-12) nonzero_weight += cond.weights[i];
  if (nonzero_weight < 1e-3) return 0.0;
  double draw = cond.sample(rng);
  if (draw < 0.0) draw = 0.0;
  return -draw;
}

}  // namespace gridforge::loadsynth

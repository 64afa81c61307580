#include "gridforge/loadsynth/meters.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "gridforge/common/io_util.hpp"

namespace gridforge::loadsynth {

std::string to_string(CustomerClass c) {
  switch (c) {
    case CustomerClass::Residential: return "residential";
    case CustomerClass::Commercial: return "commercial";
    case CustomerClass::Industrial: return "industrial";
  }
  return "?";
}

CustomerClass customer_class_from_string(const std::string& s) {
  if (s == "residential") return CustomerClass::Residential;
  if (s == "commercial") return CustomerClass::Commercial;
  if (s == "industrial") return CustomerClass::Industrial;
  throw DataError("unknown customer class: '" + s + "'");
}

std::vector<MeterSeries> aggregate_meters(
    const std::vector<MeterSeries>& meters,
    const std::map<std::string, std::string>& transformer_of) {
  std::map<std::string, std::vector<const MeterSeries*>> groups;
  for (const auto& meter : meters) {
    auto it = transformer_of.find(meter.meter_id);
    if (it == transformer_of.end())
      throw DataError("meter not mapped to a transformer: " + meter.meter_id);
    groups[it->second].push_back(&meter);
  }

  std::vector<MeterSeries> aggregates;
  for (const auto& [transformer_id, members] : groups) {
    MeterSeries agg;
    agg.meter_id = transformer_id;
    const size_t n_samples = members.front()->samples.size();
    for (const MeterSeries* m : members) {
      if (m->samples.size() != n_samples)
        throw DataError("meters under transformer " + transformer_id +
                        " have different sample counts");
    }
    agg.samples.resize(n_samples);
    for (size_t i = 0; i < n_samples; ++i) {
      const int slot = members.front()->samples[i].slot;
      double p = 0.0, q = 0.0;
      for (const MeterSeries* m : members) {
        if (m->samples[i].slot != slot)
          throw DataError("meters under transformer " + transformer_id +
                          " have misaligned slot layouts");
        p += m->samples[i].p_kw;
        q += m->samples[i].q_kvar;
      }
      agg.samples[i] = {slot, p, q};
    }
    std::array<int, 3> votes{{0, 0, 0}};
    for (const MeterSeries* m : members) ++votes[static_cast<int>(m->customer_class)];
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (votes[c] > votes[best]) best = c;
    agg.customer_class = static_cast<CustomerClass>(best);
    aggregates.push_back(std::move(agg));
  }
  return aggregates;
}

std::vector<MeterSeries> load_meters_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError("meter CSV is empty: " + path.string());
  std::vector<MeterSeries> meters;
  std::map<std::string, size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw DataError("meter CSV line " + std::to_string(line_no) + ": expected 5 columns");
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      MeterSeries series;
      series.meter_id = fields[0];
      series.customer_class = customer_class_from_string(fields[1]);
      index[fields[0]] = meters.size();
      meters.push_back(std::move(series));
      it = index.find(fields[0]);
    }
    meters[it->second].samples.push_back(
        {std::stoi(fields[2]), std::stod(fields[3]), std::stod(fields[4])});
  }
  return meters;
}

void save_meters_csv(const std::vector<MeterSeries>& meters,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "meter_id,class,slot,p_kw,q_kvar\n";
  for (const auto& meter : meters)
    for (const auto& s : meter.samples)
      out << meter.meter_id << ',' << to_string(meter.customer_class) << ',' << s.slot
          << ',' << format_double(s.p_kw) << ',' << format_double(s.q_kvar) << '\n';
  write_text_file(path, out.str());
}

TransformerMap load_transformer_map(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError("transformer map is empty: " + path.string());
  TransformerMap map;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw DataError("transformer map line " + std::to_string(line_no) +
                      ": expected 4 columns");
    map.transformer_of_meter[fields[0]] = fields[1];
    TransformerRecord rec;
    rec.transformer_id = fields[1];
    rec.node = std::stoi(fields[2]);
    if (fields[3] == "three")
      rec.three_phase = true;
    else if (fields[3] == "single")
      rec.three_phase = false;
    else
      throw DataError("transformer map line " + std::to_string(line_no) +
                      ": kind must be single or three");
    auto [it, inserted] = map.transformers.insert({fields[1], rec});
    if (!inserted && (it->second.node != rec.node || it->second.three_phase != rec.three_phase))
      throw DataError("transformer " + fields[1] + " has conflicting records");
  }
  return map;
}

}  // namespace gridforge::loadsynth

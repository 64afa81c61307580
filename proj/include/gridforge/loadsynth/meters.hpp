// Metered consumption series and transformer-level aggregation.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridforge/common/error.hpp"

namespace gridforge::loadsynth {

enum class CustomerClass { Residential, Commercial, Industrial };
std::string to_string(CustomerClass c);
CustomerClass customer_class_from_string(const std::string& s);

struct MeterSample {
  int slot = 0;       // time slot index 0..S-1; repeats across days in order
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

struct MeterSeries {
  std::string meter_id;
  CustomerClass customer_class = CustomerClass::Residential;
  std::vector<MeterSample> samples;
};

// Sums member meters per slot occurrence; the aggregate's class is the
// majority class of its members (ties break toward the lower enum value).
// Every meter must be mapped and members must share the slot layout.
std::vector<MeterSeries> aggregate_meters(
    const std::vector<MeterSeries>& meters,
    const std::map<std::string, std::string>& transformer_of);

// CSV: meter_id,class,slot,p_kw,q_kvar (one row per sample, day-major order).
std::vector<MeterSeries> load_meters_csv(const std::filesystem::path& path);
void save_meters_csv(const std::vector<MeterSeries>& meters,
                     const std::filesystem::path& path);

// CSV: meter_id,transformer_id,node,kind   (kind: single|three)
struct TransformerRecord {
  std::string transformer_id;
  int node = 0;
  bool three_phase = false;
};
struct TransformerMap {
  std::map<std::string, std::string> transformer_of_meter;
  std::map<std::string, TransformerRecord> transformers;
};
TransformerMap load_transformer_map(const std::filesystem::path& path);

}  // namespace gridforge::loadsynth

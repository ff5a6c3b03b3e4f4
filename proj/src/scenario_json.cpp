#include <json.hpp>

#include "thzmec/error.hpp"
#include "thzmec/scenario.hpp"

namespace thzmec {

namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key, const char* context) {
  if (!obj.is_object()) {
    fail(ErrorCode::parse, std::string("scenario JSON: '") + context + "' must be an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    fail(ErrorCode::parse,
         std::string("scenario JSON: missing field '") + key + "' in '" + context + "'");
  }
  return *it;
}

double number(const json& obj, const char* key, const char* context) {
  const json& v = member(obj, key, context);
  if (!v.is_number()) {
    fail(ErrorCode::parse,
         std::string("scenario JSON: field '") + key + "' in '" + context + "' must be a number");
  }
  return v.get<double>();
}

int integer(const json& obj, const char* key, const char* context) {
  const json& v = member(obj, key, context);
  if (!v.is_number_integer()) {
    fail(ErrorCode::parse, std::string("scenario JSON: field '") + key + "' in '" + context +
                               "' must be an integer");
  }
  return v.get<int>();
}

std::vector<Vec3> positions(const json& v, const char* key, const char* context, double z) {
  if (!v.is_array()) {
    fail(ErrorCode::parse, std::string("scenario JSON: field '") + key + "' in '" + context +
                               "' must be an array of [x, y] pairs");
  }
  std::vector<Vec3> out;
  out.reserve(v.size());
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      fail(ErrorCode::parse, std::string("scenario JSON: entries of '") + key + "' in '" +
                                 context + "' must be [x, y] number pairs");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>(), z});
  }
  return out;
}

json positions_to_json(const std::vector<Vec3>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(json::array({p.x, p.y}));
  return arr;
}

json parse_document(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::parse, "scenario JSON: document is not valid JSON");
  return doc;
}

QueueParams queue_from_json(const json& q) {
  QueueParams out;
  out.computing_units = integer(q, "computing_units", "queue");
  out.unit_service_rate = number(q, "unit_service_rate_tasks_per_s", "queue");
  return out;
}

BlockageParams blockage_from_json(const json& b) {
  BlockageParams out;
  out.blocker_height = number(b, "blocker_height_m", "blockage");
  out.blocker_radius = number(b, "blocker_radius_m", "blockage");
  out.blocker_density = number(b, "blocker_density_per_m2", "blockage");
  out.mec_height = number(b, "mec_height_m", "blockage");
  out.iot_height = number(b, "iot_height_m", "blockage");
  return out;
}

json queue_to_json(const QueueParams& q) {
  return json{{"computing_units", q.computing_units},
              {"unit_service_rate_tasks_per_s", q.unit_service_rate}};
}

json blockage_to_json(const BlockageParams& b) {
  return json{{"blocker_height_m", b.blocker_height},
              {"blocker_radius_m", b.blocker_radius},
              {"blocker_density_per_m2", b.blocker_density},
              {"mec_height_m", b.mec_height},
              {"iot_height_m", b.iot_height}};
}

}  // namespace

NetworkScenario scenario_from_json_text(const std::string& text) {
  const json doc = parse_document(text);

  NetworkScenario::Data d;
  const json& iots = member(doc, "iots", "document");
  d.iot_positions = positions(member(iots, "positions", "iots"), "positions", "iots", 0.0);
  const json& rates = member(iots, "arrival_rates", "iots");
  if (!rates.is_array()) {
    fail(ErrorCode::parse, "scenario JSON: field 'arrival_rates' in 'iots' must be an array");
  }
  for (const auto& r : rates) {
    if (!r.is_number()) {
      fail(ErrorCode::parse, "scenario JSON: 'arrival_rates' entries must be numbers");
    }
    d.arrival_rates.push_back(r.get<double>());
  }

  const json& mecs = member(doc, "mecs", "document");
  d.mec_positions = positions(member(mecs, "positions", "mecs"), "positions", "mecs", 0.0);

  const json& uavs = member(doc, "uavs", "document");
  d.num_uavs = integer(uavs, "count", "uavs");
  d.uav_altitude = number(uavs, "altitude_m", "uavs");
  if (uavs.contains("initial_positions") && !uavs["initial_positions"].is_null()) {
    d.initial_uav_positions = positions(uavs["initial_positions"], "initial_positions", "uavs",
                                        d.uav_altitude);
  }

  const json& physics = member(doc, "physics", "document");
  d.task_input_bits = number(physics, "task_input_bits", "physics");
  d.iot_tx_power = number(physics, "iot_tx_power_w", "physics");
  d.uav_tx_power_budget = number(physics, "uav_tx_power_budget_w", "physics");
  d.noise_density = number(physics, "noise_density_w_per_hz", "physics");
  if (physics.contains("area_side_m") && !physics["area_side_m"].is_null()) {
    d.area_side = physics["area_side_m"].get<double>();
  }
  if (physics.contains("delay_threshold_s") && !physics["delay_threshold_s"].is_null()) {
    d.delay_threshold_s = physics["delay_threshold_s"].get<double>();
  }

  const json& spectrum = member(doc, "spectrum", "document");
  d.base_frequency = number(spectrum, "base_frequency_hz", "spectrum");
  d.subband_bandwidth = number(spectrum, "subband_bandwidth_hz", "spectrum");
  d.num_subbands = integer(spectrum, "num_subbands", "spectrum");

  d.queue = queue_from_json(member(doc, "queue", "document"));
  d.blockage = blockage_from_json(member(doc, "blockage", "document"));

  return NetworkScenario::validate(std::move(d));
}

std::string scenario_to_json_text(const NetworkScenario& sc) {
  json doc;
  doc["iots"] = json{{"positions", positions_to_json(sc.iot_positions())},
                     {"arrival_rates", sc.arrival_rates()}};
  doc["mecs"] = json{{"positions", positions_to_json(sc.mec_positions())}};
  json uavs{{"count", sc.num_uavs()}, {"altitude_m", sc.uav_altitude()}};
  if (sc.initial_uav_positions()) {
    uavs["initial_positions"] = positions_to_json(*sc.initial_uav_positions());
  }
  doc["uavs"] = std::move(uavs);
  json physics{{"task_input_bits", sc.task_input_bits()},
               {"iot_tx_power_w", sc.iot_tx_power()},
               {"uav_tx_power_budget_w", sc.uav_tx_power_budget()},
               {"noise_density_w_per_hz", sc.noise_density()}};
  if (sc.data().area_side) physics["area_side_m"] = *sc.data().area_side;
  if (sc.delay_threshold_s()) physics["delay_threshold_s"] = *sc.delay_threshold_s();
  doc["physics"] = std::move(physics);
  doc["spectrum"] = json{{"base_frequency_hz", sc.base_frequency()},
                         {"subband_bandwidth_hz", sc.subband_bandwidth()},
                         {"num_subbands", sc.num_subbands()}};
  doc["queue"] = queue_to_json(sc.queue());
  doc["blockage"] = blockage_to_json(sc.blockage());
  return doc.dump(2);
}

ScenarioConfig config_from_json_text(const std::string& text) {
  const json doc = parse_document(text);
  if (!doc.is_object() || !doc.contains("num_iots")) {
    fail(ErrorCode::parse, "config JSON: expected a generator config with 'num_iots'");
  }
  ScenarioConfig c;
  c.num_iots = integer(doc, "num_iots", "config");
  c.num_mecs = integer(doc, "num_mecs", "config");
  c.num_uavs = integer(doc, "num_uavs", "config");
  c.area_side = number(doc, "area_side_m", "config");
  c.uav_altitude = number(doc, "uav_altitude_m", "config");
  c.lambda_avg = number(doc, "lambda_avg_tasks_per_s", "config");
  if (doc.contains("heterogeneous_rates")) {
    const json& v = doc["heterogeneous_rates"];
    if (!v.is_boolean()) {
      fail(ErrorCode::parse, "config JSON: 'heterogeneous_rates' must be a boolean");
    }
    c.heterogeneous_rates = v.get<bool>();
  }
  c.task_input_bits = number(doc, "task_input_bits", "config");
  c.iot_tx_power = number(doc, "iot_tx_power_w", "config");
  c.uav_tx_power_budget = number(doc, "uav_tx_power_budget_w", "config");
  c.base_frequency = number(doc, "base_frequency_hz", "config");
  c.subband_bandwidth = number(doc, "subband_bandwidth_hz", "config");
  if (doc.contains("num_subbands") && !doc["num_subbands"].is_null()) {
    c.num_subbands = integer(doc, "num_subbands", "config");
  }
  if (doc.contains("noise_density_dbm_per_hz")) {
    c.noise_density = dbm_per_hz_to_w_per_hz(number(doc, "noise_density_dbm_per_hz", "config"));
  } else {
    c.noise_density = number(doc, "noise_density_w_per_hz", "config");
  }
  if (doc.contains("delay_threshold_s") && !doc["delay_threshold_s"].is_null()) {
    c.delay_threshold_s = doc["delay_threshold_s"].get<double>();
  }
  c.queue = queue_from_json(member(doc, "queue", "config"));
  c.blockage = blockage_from_json(member(doc, "blockage", "config"));
  return c;
}

std::string config_to_json_text(const ScenarioConfig& c) {
  json doc{{"num_iots", c.num_iots},
           {"num_mecs", c.num_mecs},
           {"num_uavs", c.num_uavs},
           {"area_side_m", c.area_side},
           {"uav_altitude_m", c.uav_altitude},
           {"lambda_avg_tasks_per_s", c.lambda_avg},
           {"heterogeneous_rates", c.heterogeneous_rates},
           {"task_input_bits", c.task_input_bits},
           {"iot_tx_power_w", c.iot_tx_power},
           {"uav_tx_power_budget_w", c.uav_tx_power_budget},
           {"base_frequency_hz", c.base_frequency},
           {"subband_bandwidth_hz", c.subband_bandwidth},
           {"noise_density_w_per_hz", c.noise_density},
           {"queue", queue_to_json(c.queue)},
           {"blockage", blockage_to_json(c.blockage)}};
  if (c.num_subbands >= 0) doc["num_subbands"] = c.num_subbands;
  if (c.delay_threshold_s) doc["delay_threshold_s"] = *c.delay_threshold_s;
  return doc.dump(2);
}

}  // namespace thzmec

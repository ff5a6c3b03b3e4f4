#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thzmec/channel.hpp"
#include "thzmec/queueing.hpp"

namespace thzmec {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double dbm_per_hz_to_w_per_hz(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// Generator input: everything needed to draw a random topology.
struct ScenarioConfig {
  int num_iots = 20;
  int num_mecs = 4;
  int num_uavs = 3;
  double area_side = 400.0;        // m, square network area
  double uav_altitude = 20.0;      // H, m
  double lambda_avg = 1.2;         // tasks/s
  // When set, per-IoT rates are drawn uniformly in [0.5, 1.5]*lambda_avg and
  // rescaled so the sample mean is exactly lambda_avg. The draw depends only
  // on the seed, so sweeping lambda_avg keeps topologies and rate shapes paired.
  bool heterogeneous_rates = false;
  double task_input_bits = 8e7;    // D_in, 10 MB
  double iot_tx_power = 0.2;       // P_IoT, W
  double uav_tx_power_budget = 2.0;// P_UAV, W
  double base_frequency = 0.34e12; // f_o, Hz
  double subband_bandwidth = 1e9;  // B, Hz
  int num_subbands = -1;           // U; -1 means U = num_iots
  double noise_density = dbm_per_hz_to_w_per_hz(-174.0);  // N0, W/Hz
  QueueParams queue{2, 4.0};
  BlockageParams blockage{};
  std::optional<double> delay_threshold_s;  // recorded, not enforced

  /// The paper's Table I parameter set.
  static ScenarioConfig table1() { return ScenarioConfig{}; }
};

/// Immutable, validated network topology and physical parameters.
class NetworkScenario {
 public:
  struct Data {
    std::vector<Vec3> iot_positions;   // z = 0
    std::vector<Vec3> mec_positions;   // z = 0
    int num_uavs = 0;
    double uav_altitude = 0.0;                    // H
    std::vector<double> arrival_rates;            // lambda_i
    double task_input_bits = 0.0;                 // D_in
    double iot_tx_power = 0.0;                    // P_IoT
    double uav_tx_power_budget = 0.0;             // P_UAV
    double base_frequency = 0.0;                  // f_o
    double subband_bandwidth = 0.0;               // B
    int num_subbands = 0;                         // U
    double noise_density = 0.0;                   // N0
    QueueParams queue;
    BlockageParams blockage;
    std::optional<std::vector<Vec3>> initial_uav_positions;  // z = H
    std::optional<double> area_side;              // l_net when known
    std::optional<double> delay_threshold_s;      // stored only
    std::shared_ptr<const AbsorptionTable> absorption;  // default table when null
  };

  /// Validates every invariant; either returns a usable scenario or throws.
  static NetworkScenario validate(Data data);

  int num_iots() const { return static_cast<int>(d_.iot_positions.size()); }
  int num_mecs() const { return static_cast<int>(d_.mec_positions.size()); }
  int num_uavs() const { return d_.num_uavs; }
  int num_subbands() const { return d_.num_subbands; }
  double uav_altitude() const { return d_.uav_altitude; }
  const std::vector<Vec3>& iot_positions() const { return d_.iot_positions; }
  const std::vector<Vec3>& mec_positions() const { return d_.mec_positions; }
  const std::vector<double>& arrival_rates() const { return d_.arrival_rates; }
  double task_input_bits() const { return d_.task_input_bits; }
  double iot_tx_power() const { return d_.iot_tx_power; }
  double uav_tx_power_budget() const { return d_.uav_tx_power_budget; }
  double base_frequency() const { return d_.base_frequency; }
  double subband_bandwidth() const { return d_.subband_bandwidth; }
  double noise_density() const { return d_.noise_density; }
  const QueueParams& queue() const { return d_.queue; }
  const BlockageParams& blockage() const { return d_.blockage; }
  const std::optional<std::vector<Vec3>>& initial_uav_positions() const {
    return d_.initial_uav_positions;
  }
  const std::optional<double>& delay_threshold_s() const { return d_.delay_threshold_s; }
  const AbsorptionTable& absorption() const { return *d_.absorption; }
  std::shared_ptr<const AbsorptionTable> absorption_ptr() const { return d_.absorption; }

  double total_arrival_rate() const;
  /// Network side length: the generation area when known, otherwise the
  /// smallest axis-aligned square anchored at the origin that covers all
  /// ground nodes.
  double area_side() const;

  const Data& data() const { return d_; }

 private:
  explicit NetworkScenario(Data data) : d_(std::move(data)) {}
  Data d_;
};

/// Uniform IoT/MEC placement on the square; identical seed implies a
/// bit-identical scenario.
NetworkScenario generate_scenario(uint64_t seed, const ScenarioConfig& config);

/// Lloyd's k-means (k-means++ seeding, 100-iteration cap, lowest-index
/// tie-breaks) over the IoT ground positions, centroids lifted to altitude H.
std::vector<Vec3> init_uav_positions(const NetworkScenario& scenario, uint64_t seed);

// JSON scenario document (see README for the schema).
NetworkScenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const NetworkScenario& scenario);
NetworkScenario load_scenario(const std::string& path);
void save_scenario(const NetworkScenario& scenario, const std::string& path);

// Generator config as JSON (the bundled data/table1.json format).
ScenarioConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ScenarioConfig& config);

/// Resolves the absorption table: the THZMEC_ABSORPTION_TABLE environment
/// variable when set, otherwise the bundled default.
std::shared_ptr<const AbsorptionTable> resolve_absorption_table();

}  // namespace thzmec

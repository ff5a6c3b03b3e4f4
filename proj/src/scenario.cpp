#include "thzmec/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "thzmec/error.hpp"
#include "thzmec/rng.hpp"

namespace thzmec {

double NetworkScenario::total_arrival_rate() const {
  double sum = 0.0;
  for (double r : d_.arrival_rates) sum += r;
  return sum;
}

double NetworkScenario::area_side() const {
  if (d_.area_side) return *d_.area_side;
  double side = 0.0;
  for (const auto& p : d_.iot_positions) side = std::max({side, p.x, p.y});
  for (const auto& p : d_.mec_positions) side = std::max({side, p.x, p.y});
  return side;
}

NetworkScenario NetworkScenario::validate(Data data) {
  const int num_iots = static_cast<int>(data.iot_positions.size());
  const int num_mecs = static_cast<int>(data.mec_positions.size());
  require(num_iots >= 1, ErrorCode::invalid_argument, "scenario: needs at least one IoT");
  require(num_mecs >= 1, ErrorCode::invalid_argument, "scenario: needs at least one MEC");
  require(data.num_uavs >= 0, ErrorCode::invalid_argument, "scenario: num_uavs must be >= 0");
  require(static_cast<int>(data.arrival_rates.size()) == num_iots, ErrorCode::invalid_argument,
          "scenario: arrival_rates size must equal the IoT count");
  for (double r : data.arrival_rates) {
    require(r > 0.0, ErrorCode::invalid_argument, "scenario: arrival_rates must be positive");
  }
  require(data.task_input_bits > 0.0, ErrorCode::invalid_argument,
          "scenario: task_input_bits must be positive");
  require(data.iot_tx_power > 0.0, ErrorCode::invalid_argument,
          "scenario: iot_tx_power_w must be positive");
  require(data.uav_tx_power_budget > 0.0, ErrorCode::invalid_argument,
          "scenario: uav_tx_power_budget_w must be positive");
  require(data.subband_bandwidth > 0.0, ErrorCode::invalid_argument,
          "scenario: subband_bandwidth_hz must be positive");
  require(data.base_frequency > 0.0, ErrorCode::invalid_argument,
          "scenario: base_frequency_hz must be positive");
  require(data.noise_density > 0.0, ErrorCode::invalid_argument,
          "scenario: noise_density_w_per_hz must be positive");
  require(data.uav_altitude > 0.0, ErrorCode::invalid_argument,
          "scenario: uav_altitude_m must be positive");
  require(data.num_subbands >= num_iots, ErrorCode::invalid_argument,
          "scenario: num_subbands must be >= the IoT count (every IoT needs a sub-band)");
  require(data.queue.computing_units >= 2, ErrorCode::invalid_argument,
          "scenario: queue.computing_units must be an integer >= 2");
  require(data.queue.unit_service_rate > 0.0, ErrorCode::invalid_argument,
          "scenario: queue.unit_service_rate must be positive");

  const auto& blk = data.blockage;
  require(blk.blocker_density >= 0.0, ErrorCode::invalid_argument,
          "scenario: blockage.blocker_density_per_m2 must be >= 0");
  if (blk.blocker_density > 0.0) {
    require(blk.blocker_radius >= 0.0, ErrorCode::invalid_argument,
            "scenario: blockage.blocker_radius_m must be >= 0");
    require(blk.mec_height > blk.iot_height, ErrorCode::invalid_argument,
            "scenario: blockage requires mec_height_m > iot_height_m");
    require(blk.blocker_height > blk.iot_height && blk.blocker_height < blk.mec_height,
            ErrorCode::invalid_argument,
            "scenario: blockage requires iot_height_m < blocker_height_m < mec_height_m");
  }

  double total_rate = 0.0;
  for (double r : data.arrival_rates) total_rate += r;
  const double capacity = num_mecs * data.queue.total_service_rate();
  if (total_rate >= capacity) {
    std::ostringstream msg;
    msg << "stability-infeasible: total arrival rate " << total_rate
        << " tasks/s is not below the aggregate service capacity J*s*mu = " << capacity;
    fail(ErrorCode::infeasible, msg.str());
  }

  if (data.initial_uav_positions) {
    require(static_cast<int>(data.initial_uav_positions->size()) == data.num_uavs,
            ErrorCode::invalid_argument,
            "scenario: initial_uav_positions size must equal num_uavs");
    for (auto& p : *data.initial_uav_positions) p.z = data.uav_altitude;
  }
  if (data.area_side) {
    require(*data.area_side > 0.0, ErrorCode::invalid_argument,
            "scenario: area_side_m must be positive");
  }

  if (!data.absorption) data.absorption = resolve_absorption_table();
  // Every sub-band must be covered by the table; failing here beats failing
  // deep inside a solver.
  for (int u : {1, data.num_subbands}) {
    const double f = subband_center_frequency(u, data.base_frequency, data.subband_bandwidth,
                                              data.num_subbands);
    data.absorption->k_at(f);
  }

  return NetworkScenario(std::move(data));
}

NetworkScenario generate_scenario(uint64_t seed, const ScenarioConfig& config) {
  require(config.area_side > 0.0, ErrorCode::invalid_argument,
          "config: area_side_m must be positive");
  require(config.num_iots > 0 && config.num_mecs > 0, ErrorCode::invalid_argument,
          "config: num_iots and num_mecs must be positive");
  require(config.num_uavs >= 0, ErrorCode::invalid_argument, "config: num_uavs must be >= 0");
  require(config.lambda_avg > 0.0, ErrorCode::invalid_argument,
          "config: lambda_avg_tasks_per_s must be positive");

  Rng rng(seed);
  NetworkScenario::Data d;
  d.iot_positions.reserve(config.num_iots);
  for (int i = 0; i < config.num_iots; ++i) {
    d.iot_positions.push_back({rng.uniform(0.0, config.area_side),
                               rng.uniform(0.0, config.area_side), 0.0});
  }
  d.mec_positions.reserve(config.num_mecs);
  for (int j = 0; j < config.num_mecs; ++j) {
    d.mec_positions.push_back({rng.uniform(0.0, config.area_side),
                               rng.uniform(0.0, config.area_side), 0.0});
  }

  d.arrival_rates.assign(config.num_iots, config.lambda_avg);
  if (config.heterogeneous_rates) {
    double mean = 0.0;
    std::vector<double> shape(config.num_iots);
    for (auto& s : shape) {
      s = rng.uniform(0.5, 1.5);
      mean += s;
    }
    mean /= config.num_iots;
    for (int i = 0; i < config.num_iots; ++i) {
      d.arrival_rates[i] = config.lambda_avg * shape[i] / mean;
    }
  }

  d.num_uavs = config.num_uavs;
  d.uav_altitude = config.uav_altitude;
  d.task_input_bits = config.task_input_bits;
  d.iot_tx_power = config.iot_tx_power;
  d.uav_tx_power_budget = config.uav_tx_power_budget;
  d.base_frequency = config.base_frequency;
  d.subband_bandwidth = config.subband_bandwidth;
  d.num_subbands = config.num_subbands < 0 ? config.num_iots : config.num_subbands;
  d.noise_density = config.noise_density;
  d.queue = config.queue;
  d.blockage = config.blockage;
  d.area_side = config.area_side;
  d.delay_threshold_s = config.delay_threshold_s;
  return NetworkScenario::validate(std::move(d));
}

namespace {

struct Point2 {
  double x, y;
};

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Lloyd's algorithm with k-means++ seeding. Assignment ties break to the
// lowest-index centroid; empty clusters are reseeded to the farthest point.
std::vector<Point2> kmeans(const std::vector<Point2>& points, int k, Rng& rng, int max_iter) {
  const int n = static_cast<int>(points.size());
  std::vector<Point2> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.next_index(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // All remaining mass at existing centroids; any point works.
      centroids.push_back(points[rng.next_index(n)]);
      continue;
    }
    double r = rng.next_double() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      r -= d2[i];
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
    centroids.push_back(points[pick]);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    std::vector<Point2> sums(k, {0.0, 0.0});
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[assign[i]].x += points[i].x;
      sums[assign[i]].y += points[i].y;
      counts[assign[i]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed to the point farthest from its centroid.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = sq_dist(points[i], centroids[assign[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids[c] = points[far];
      } else {
        centroids[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
      }
    }
  }
  return centroids;
}

}  // namespace

std::vector<Vec3> init_uav_positions(const NetworkScenario& scenario, uint64_t seed) {
  const int m = scenario.num_uavs();
  const int n = scenario.num_iots();
  require(m <= n, ErrorCode::invalid_argument,
          "init_uav_positions: more UAVs than IoTs (k-means needs M <= I)");
  if (m == 0) return {};
  std::vector<Point2> pts;
  pts.reserve(n);
  for (const auto& p : scenario.iot_positions()) pts.push_back({p.x, p.y});
  Rng rng(seed);
  const auto centroids = kmeans(pts, m, rng, 100);
  std::vector<Vec3> out;
  out.reserve(m);
  for (const auto& c : centroids) out.push_back({c.x, c.y, scenario.uav_altitude()});
  return out;
}

std::shared_ptr<const AbsorptionTable> resolve_absorption_table() {
  if (const char* path = std::getenv("THZMEC_ABSORPTION_TABLE"); path && *path) {
    return std::make_shared<const AbsorptionTable>(AbsorptionTable::from_csv_file(path));
  }
  return AbsorptionTable::bundled_default();
}

NetworkScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

void save_scenario(const NetworkScenario& scenario, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << scenario_to_json_text(scenario) << "\n";
  require(static_cast<bool>(out), ErrorCode::io, "failed writing scenario to '" + path + "'");
}

}  // namespace thzmec

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "thzmec/error.hpp"
#include "thzmec/scenario.hpp"

using namespace thzmec;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Plain Lloyd iteration used as an oracle for the k-means properties.
double wcss(const std::vector<Vec3>& points, const std::vector<Vec3>& centroids) {
  double total = 0.0;
  for (const auto& p : points) {
    double best = 1e300;
    for (const auto& c : centroids) {
      const double dx = p.x - c.x, dy = p.y - c.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    total += best;
  }
  return total;
}

}  // namespace

TEST_CASE("generate_scenario draws uniform positions and is deterministic") {
  ScenarioConfig config = ScenarioConfig::table1();
  const auto sc = generate_scenario(7, config);
  CHECK(sc.num_iots() == 20);
  CHECK(sc.num_mecs() == 4);
  CHECK(sc.num_uavs() == 3);
  CHECK(sc.num_subbands() == 20);  // U defaults to I
  for (const auto& p : sc.iot_positions()) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 400.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 400.0);
    CHECK(p.z == 0.0);
  }
  for (const auto& p : sc.mec_positions()) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 400.0);
  }

  const auto again = generate_scenario(7, config);
  CHECK(again.iot_positions().size() == sc.iot_positions().size());
  for (std::size_t k = 0; k < sc.iot_positions().size(); ++k) {
    CHECK(again.iot_positions()[k].x == sc.iot_positions()[k].x);
    CHECK(again.iot_positions()[k].y == sc.iot_positions()[k].y);
  }
  const auto other = generate_scenario(8, config);
  CHECK(other.iot_positions()[0].x != sc.iot_positions()[0].x);
}

TEST_CASE("Table I stability headroom: 20 * 1.2 < 4 * 2 * 4") {
  ScenarioConfig config = ScenarioConfig::table1();
  const auto sc = generate_scenario(1, config);
  CHECK(sc.total_arrival_rate() == doctest::Approx(24.0));
  CHECK(sc.total_arrival_rate() < 32.0);
}

TEST_CASE("stability-infeasible configs are rejected") {
  ScenarioConfig config = ScenarioConfig::table1();
  config.lambda_avg = 1.7;  // 34 >= 32
  CHECK_THROWS_WITH_AS(static_cast<void>(generate_scenario(1, config)),
                       doctest::Contains("stability-infeasible"), Error);
}

TEST_CASE("heterogeneous rates keep the exact mean and stay in band") {
  ScenarioConfig config = ScenarioConfig::table1();
  config.heterogeneous_rates = true;
  const auto sc = generate_scenario(3, config);
  double mean = 0.0;
  for (double r : sc.arrival_rates()) mean += r;
  mean /= sc.num_iots();
  CHECK(mean == doctest::Approx(1.2).epsilon(1e-12));
  bool varied = false;
  for (double r : sc.arrival_rates()) {
    if (std::abs(r - 1.2) > 1e-9) varied = true;
  }
  CHECK(varied);

  // Scaling lambda_avg scales every rate by the same factor (paired sweeps).
  ScenarioConfig scaled = config;
  scaled.lambda_avg = 0.6;
  const auto sc2 = generate_scenario(3, scaled);
  for (int i = 0; i < sc.num_iots(); ++i) {
    CHECK(sc2.arrival_rates()[i] == doctest::Approx(0.5 * sc.arrival_rates()[i]).epsilon(1e-12));
  }
}

TEST_CASE("k-means UAV initialization") {
  // One UAV above the centroid of two IoTs.
  ScenarioConfig config;
  config.num_iots = 2;
  config.num_mecs = 1;
  config.num_uavs = 1;
  config.lambda_avg = 1.0;
  NetworkScenario::Data d = generate_scenario(1, config).data();
  d.iot_positions = {{0.0, 0.0, 0.0}, {100.0, 0.0, 0.0}};
  d.arrival_rates = {1.0, 1.0};
  const auto sc = NetworkScenario::validate(std::move(d));
  const auto centroids = init_uav_positions(sc, 5);
  REQUIRE(centroids.size() == 1);
  CHECK(centroids[0].x == doctest::Approx(50.0));
  CHECK(centroids[0].y == doctest::Approx(0.0));
  CHECK(centroids[0].z == doctest::Approx(sc.uav_altitude()));

  // M = I: every UAV sits on one IoT.
  ScenarioConfig cfg2 = ScenarioConfig::table1();
  cfg2.num_uavs = 20;
  const auto sc2 = generate_scenario(4, cfg2);
  const auto all = init_uav_positions(sc2, 4);
  std::set<std::pair<double, double>> uav_set, iot_set;
  for (const auto& q : all) uav_set.insert({q.x, q.y});
  for (const auto& p : sc2.iot_positions()) iot_set.insert({p.x, p.y});
  CHECK(uav_set == iot_set);

  // M > I errors.
  ScenarioConfig cfg3 = ScenarioConfig::table1();
  cfg3.num_iots = 2;
  cfg3.num_mecs = 1;
  cfg3.num_uavs = 3;
  cfg3.lambda_avg = 1.0;
  const auto sc3 = generate_scenario(4, cfg3);
  CHECK_THROWS_AS(static_cast<void>(init_uav_positions(sc3, 4)), Error);
}

TEST_CASE("k-means centroids do not increase WCSS versus a re-run oracle") {
  const auto sc = generate_scenario(7, ScenarioConfig::table1());
  const auto centroids = init_uav_positions(sc, 7);
  REQUIRE(centroids.size() == 3);
  // Rerunning one extra Lloyd step from the returned centroids must not
  // lower WCSS by more than numerical noise, i.e. the run converged.
  std::vector<Vec3> pts = sc.iot_positions();
  std::vector<Vec3> next(centroids.size(), {0, 0, 0});
  std::vector<int> count(centroids.size(), 0);
  for (const auto& p : pts) {
    int best = 0;
    double bd = 1e300;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double dx = p.x - centroids[c].x, dy = p.y - centroids[c].y;
      if (dx * dx + dy * dy < bd) {
        bd = dx * dx + dy * dy;
        best = static_cast<int>(c);
      }
    }
    next[best].x += p.x;
    next[best].y += p.y;
    count[best]++;
  }
  for (std::size_t c = 0; c < next.size(); ++c) {
    if (count[c] > 0) {
      next[c].x /= count[c];
      next[c].y /= count[c];
    } else {
      next[c] = centroids[c];
    }
  }
  CHECK(wcss(pts, next) >= wcss(pts, centroids) - 1e-9);

  // Determinism and z-lift.
  const auto again = init_uav_positions(sc, 7);
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    CHECK(again[c].x == centroids[c].x);
    CHECK(again[c].y == centroids[c].y);
    CHECK(centroids[c].z == sc.uav_altitude());
  }
}

TEST_CASE("scenario JSON round trip is bit-exact") {
  ScenarioConfig config = ScenarioConfig::table1();
  config.heterogeneous_rates = true;
  config.delay_threshold_s = 5.0;
  const auto sc = generate_scenario(11, config);
  const std::string path = temp_path("thzmec_roundtrip.json");
  save_scenario(sc, path);
  const auto loaded = load_scenario(path);
  std::remove(path.c_str());

  REQUIRE(loaded.num_iots() == sc.num_iots());
  for (int i = 0; i < sc.num_iots(); ++i) {
    CHECK(loaded.iot_positions()[i].x == sc.iot_positions()[i].x);
    CHECK(loaded.iot_positions()[i].y == sc.iot_positions()[i].y);
    CHECK(loaded.arrival_rates()[i] == sc.arrival_rates()[i]);
  }
  for (int j = 0; j < sc.num_mecs(); ++j) {
    CHECK(loaded.mec_positions()[j].x == sc.mec_positions()[j].x);
  }
  CHECK(loaded.num_uavs() == sc.num_uavs());
  CHECK(loaded.uav_altitude() == sc.uav_altitude());
  CHECK(loaded.task_input_bits() == sc.task_input_bits());
  CHECK(loaded.iot_tx_power() == sc.iot_tx_power());
  CHECK(loaded.uav_tx_power_budget() == sc.uav_tx_power_budget());
  CHECK(loaded.base_frequency() == sc.base_frequency());
  CHECK(loaded.subband_bandwidth() == sc.subband_bandwidth());
  CHECK(loaded.num_subbands() == sc.num_subbands());
  CHECK(loaded.noise_density() == sc.noise_density());
  CHECK(loaded.queue().computing_units == sc.queue().computing_units);
  CHECK(loaded.queue().unit_service_rate == sc.queue().unit_service_rate);
  CHECK(loaded.blockage().blocker_density == sc.blockage().blocker_density);
  CHECK(loaded.delay_threshold_s() == sc.delay_threshold_s());
  CHECK(loaded.area_side() == sc.area_side());
}

TEST_CASE("scenario JSON schema errors name the field") {
  const char* missing_rates = R"({
    "iots": {"positions": [[0, 0], [1, 1]]},
    "mecs": {"positions": [[5, 5]]},
    "uavs": {"count": 0, "altitude_m": 20.0},
    "physics": {"task_input_bits": 8e7, "iot_tx_power_w": 0.2,
                "uav_tx_power_budget_w": 2.0, "noise_density_w_per_hz": 4e-21},
    "spectrum": {"base_frequency_hz": 3.4e11, "subband_bandwidth_hz": 1e9, "num_subbands": 2},
    "queue": {"computing_units": 2, "unit_service_rate_tasks_per_s": 4.0},
    "blockage": {"blocker_height_m": 1.7, "blocker_radius_m": 0.3,
                 "blocker_density_per_m2": 0.2, "mec_height_m": 3.0, "iot_height_m": 0.3}
  })";
  CHECK_THROWS_WITH_AS(static_cast<void>(scenario_from_json_text(missing_rates)),
                       doctest::Contains("arrival_rates"), Error);

  CHECK_THROWS_AS(static_cast<void>(scenario_from_json_text("not json at all")), Error);

  // Fractional computing units are rejected at the schema level.
  std::string complete = missing_rates;
  complete.replace(complete.find("\"positions\": [[0, 0], [1, 1]]}"),
                   std::string("\"positions\": [[0, 0], [1, 1]]}").size(),
                   "\"positions\": [[0, 0], [1, 1]], \"arrival_rates\": [1.0, 1.0]}");
  CHECK_NOTHROW(static_cast<void>(scenario_from_json_text(complete)));
  std::string fractional = complete;
  fractional.replace(fractional.find("\"computing_units\": 2"),
                     std::string("\"computing_units\": 2").size(),
                     "\"computing_units\": 2.5");
  CHECK_THROWS_WITH_AS(static_cast<void>(scenario_from_json_text(fractional)),
                       doctest::Contains("computing_units"), Error);
}

TEST_CASE("invariant U >= I propagates through load") {
  const char* too_few_subbands = R"({
    "iots": {"positions": [[0, 0], [1, 1], [2, 2]], "arrival_rates": [1.0, 1.0, 1.0]},
    "mecs": {"positions": [[5, 5]]},
    "uavs": {"count": 0, "altitude_m": 20.0},
    "physics": {"task_input_bits": 8e7, "iot_tx_power_w": 0.2,
                "uav_tx_power_budget_w": 2.0, "noise_density_w_per_hz": 4e-21},
    "spectrum": {"base_frequency_hz": 3.4e11, "subband_bandwidth_hz": 1e9, "num_subbands": 2},
    "queue": {"computing_units": 2, "unit_service_rate_tasks_per_s": 4.0},
    "blockage": {"blocker_height_m": 1.7, "blocker_radius_m": 0.3,
                 "blocker_density_per_m2": 0.2, "mec_height_m": 3.0, "iot_height_m": 0.3}
  })";
  CHECK_THROWS_WITH_AS(static_cast<void>(scenario_from_json_text(too_few_subbands)),
                       doctest::Contains("num_subbands"), Error);
}

TEST_CASE("bundled table1.json matches the built-in defaults") {
  std::ifstream in(std::string(THZMEC_DATA_DIR) + "/table1.json");
  REQUIRE(static_cast<bool>(in));
  std::stringstream buf;
  buf << in.rdbuf();
  const ScenarioConfig file = config_from_json_text(buf.str());
  const ScenarioConfig code = ScenarioConfig::table1();
  CHECK(file.num_iots == code.num_iots);
  CHECK(file.num_mecs == code.num_mecs);
  CHECK(file.num_uavs == code.num_uavs);
  CHECK(file.area_side == code.area_side);
  CHECK(file.uav_altitude == code.uav_altitude);
  CHECK(file.lambda_avg == code.lambda_avg);
  CHECK(file.heterogeneous_rates == code.heterogeneous_rates);
  CHECK(file.task_input_bits == code.task_input_bits);
  CHECK(file.iot_tx_power == code.iot_tx_power);
  CHECK(file.uav_tx_power_budget == code.uav_tx_power_budget);
  CHECK(file.base_frequency == code.base_frequency);
  CHECK(file.subband_bandwidth == code.subband_bandwidth);
  CHECK(file.noise_density == doctest::Approx(code.noise_density).epsilon(1e-14));
  CHECK(file.queue.computing_units == code.queue.computing_units);
  CHECK(file.queue.unit_service_rate == code.queue.unit_service_rate);
  CHECK(file.blockage.blocker_height == code.blockage.blocker_height);
  CHECK(file.blockage.blocker_density == code.blockage.blocker_density);
}

TEST_CASE("config validation errors") {
  ScenarioConfig bad = ScenarioConfig::table1();
  bad.area_side = -1.0;
  CHECK_THROWS_AS(static_cast<void>(generate_scenario(1, bad)), Error);

  ScenarioConfig bad_queue = ScenarioConfig::table1();
  bad_queue.queue.computing_units = 1;  // Harel bound needs s >= 2
  CHECK_THROWS_AS(static_cast<void>(generate_scenario(1, bad_queue)), Error);
}

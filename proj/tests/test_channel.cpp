#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "thzmec/channel.hpp"
#include "thzmec/error.hpp"
#include "thzmec/scenario.hpp"

using namespace thzmec;

namespace {

NetworkScenario two_node_scenario(double k_const) {
  NetworkScenario::Data d;
  d.iot_positions = {{0.0, 0.0, 0.0}};
  d.mec_positions = {{100.0, 0.0, 0.0}};
  d.arrival_rates = {1.0};
  d.num_uavs = 1;
  d.uav_altitude = 20.0;
  d.task_input_bits = 8e7;
  d.iot_tx_power = 0.2;
  d.uav_tx_power_budget = 2.0;
  d.base_frequency = 0.34e12;
  d.subband_bandwidth = 1e9;
  d.num_subbands = 2;
  d.noise_density = dbm_per_hz_to_w_per_hz(-174.0);
  d.queue = {2, 4.0};
  d.blockage = {1.7, 0.3, 0.2, 3.0, 0.3};
  d.absorption = std::make_shared<const AbsorptionTable>(AbsorptionTable::constant(k_const));
  return NetworkScenario::validate(std::move(d));
}

}  // namespace

TEST_CASE("sub-band center frequencies") {
  CHECK(subband_center_frequency(1, 0.34e12, 1e9, 40) == doctest::Approx(0.3405e12));
  CHECK(subband_center_frequency(2, 0.34e12, 1e9, 40) == doctest::Approx(0.3415e12));
  CHECK(subband_center_frequency(40, 0.34e12, 1e9, 40) == doctest::Approx(0.3795e12));
  CHECK_THROWS_AS(subband_center_frequency(0, 0.34e12, 1e9, 40), Error);
  CHECK_THROWS_AS(subband_center_frequency(41, 0.34e12, 1e9, 40), Error);
}

TEST_CASE("channel gain") {
  // Free-space-only value at d = 1 m, f = 0.34 THz.
  const double fs = kSpeedOfLight / (4.0 * M_PI * 0.34e12);
  CHECK(channel_gain(1.0, 0.34e12, 0.0) == doctest::Approx(fs * fs).epsilon(1e-14));
  CHECK(fs * fs == doctest::Approx(4.9234e-9).epsilon(1e-3));

  // Inverse-square law at zero absorption.
  CHECK(channel_gain(2.0, 0.34e12, 0.0) ==
        doctest::Approx(channel_gain(1.0, 0.34e12, 0.0) / 4.0).epsilon(1e-14));

  // Absorption splits off as exp(-K d).
  const double g0 = channel_gain(100.0, 0.34e12, 0.0);
  CHECK(channel_gain(100.0, 0.34e12, 0.01) == doctest::Approx(g0 * std::exp(-1.0)).epsilon(1e-14));

  CHECK_THROWS_AS(channel_gain(0.0, 0.34e12, 0.0), Error);

  // Strictly decreasing in d, f and K.
  CHECK(channel_gain(50.0, 0.34e12, 0.005) > channel_gain(51.0, 0.34e12, 0.005));
  CHECK(channel_gain(50.0, 0.34e12, 0.005) > channel_gain(50.0, 0.35e12, 0.005));
  CHECK(channel_gain(50.0, 0.34e12, 0.005) > channel_gain(50.0, 0.34e12, 0.006));
}

TEST_CASE("non-blockage probability") {
  BlockageParams table1{1.7, 0.3, 0.2, 3.0, 0.3};
  // zeta = exp(-2 * 0.2 * 0.09) = exp(-0.036)
  CHECK(non_blockage_probability(0.0, table1) ==
        doctest::Approx(std::exp(-0.036)).epsilon(1e-14));
  CHECK(std::exp(-0.036) == doctest::Approx(0.96464).epsilon(1e-5));

  // delta_b = 2 * 0.2 * 0.3 * (1.7 - 0.3) / (3.0 - 0.3)
  const double delta = 2.0 * 0.2 * 0.3 * 1.4 / 2.7;
  CHECK(delta == doctest::Approx(0.06222).epsilon(1e-4));
  CHECK(non_blockage_probability(50.0, table1) ==
        doctest::Approx(std::exp(-0.036) * std::exp(-delta * 50.0)).epsilon(1e-14));

  BlockageParams no_blockers{1.7, 0.3, 0.0, 3.0, 0.3};
  CHECK(non_blockage_probability(123.0, no_blockers) == 1.0);

  BlockageParams degenerate{1.7, 0.3, 0.2, 0.3, 0.3};
  CHECK_THROWS_AS(non_blockage_probability(1.0, degenerate), Error);

  // Log-linearity in d.
  const double l1 = std::log(non_blockage_probability(30.0, table1));
  const double l2 = std::log(non_blockage_probability(80.0, table1));
  CHECK(l1 - l2 == doctest::Approx(delta * 50.0).epsilon(1e-12));
}

TEST_CASE("long-term rate") {
  const auto sc = two_node_scenario(0.005);
  CHECK(long_term_rate(LinkKind::iot_to_mec, 100.0, 0.0, 1, sc) == 0.0);

  const double aerial = long_term_rate(LinkKind::iot_to_uav, 100.0, 0.2, 1, sc);
  const double ground = long_term_rate(LinkKind::iot_to_mec, 100.0, 0.2, 1, sc);
  CHECK(aerial > 0.0);
  CHECK(ground > 0.0);
  CHECK(aerial > ground);  // blockage factor < 1
  CHECK(ground ==
        doctest::Approx(aerial * non_blockage_probability(100.0, sc.blockage())).epsilon(1e-12));

  // Spreadsheet-style cross-check of the full expression.
  const double f = subband_center_frequency(1, 0.34e12, 1e9, 2);
  const double gain = channel_gain(100.0, f, 0.005);
  const double expected = 1e9 * std::log2(1.0 + 2.0 * gain / (1e9 * sc.noise_density()));
  CHECK(long_term_rate(LinkKind::uav_to_mec, 100.0, 2.0, 1, sc) ==
        doctest::Approx(expected).epsilon(1e-12));

  // Monotone in P and d.
  CHECK(long_term_rate(LinkKind::iot_to_uav, 100.0, 0.3, 1, sc) > aerial);
  CHECK(long_term_rate(LinkKind::iot_to_uav, 110.0, 0.2, 1, sc) < aerial);

  // g = 1 + SNR stays above 1 for positive power.
  LinkBudget budget(sc);
  CHECK(budget.snr(500.0, 1e-6, 0) > 0.0);
}

TEST_CASE("absorption table parsing and interpolation") {
  const auto table = AbsorptionTable::from_csv_text(
      "frequency_hz,k_per_m\n1.0e11,0.001\n2.0e11,0.003\n4.0e11,0.002\n", "test");
  CHECK(table.k_at(1.0e11) == doctest::Approx(0.001));
  CHECK(table.k_at(2.0e11) == doctest::Approx(0.003));
  CHECK(table.k_at(1.5e11) == doctest::Approx(0.002).epsilon(1e-12));  // linear midpoint
  CHECK(table.k_at(3.0e11) == doctest::Approx(0.0025).epsilon(1e-12));
  CHECK_THROWS_AS(table.k_at(9.9e10), Error);   // extrapolation is an error
  CHECK_THROWS_AS(table.k_at(4.1e11), Error);

  CHECK_THROWS_AS(AbsorptionTable::from_csv_text("wrong,header\n1,2\n", "test"), Error);
  CHECK_THROWS_AS(
      AbsorptionTable::from_csv_text("frequency_hz,k_per_m\n2e11,0.1\n1e11,0.2\n", "test"),
      Error);
  CHECK_THROWS_AS(
      AbsorptionTable::from_csv_text("frequency_hz,k_per_m\n1e11,-0.1\n", "test"), Error);
  CHECK_THROWS_AS(AbsorptionTable::from_csv_text("frequency_hz,k_per_m\n1e11\n", "test"),
                  Error);

  const auto flat = AbsorptionTable::constant(0.004);
  CHECK(flat.k_at(1.0) == 0.004);
  CHECK(flat.k_at(9e15) == 0.004);
}

TEST_CASE("THZMEC_ABSORPTION_TABLE overrides the bundled default") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "thzmec_env_table.csv").string();
  {
    std::ofstream out(path);
    out << "frequency_hz,k_per_m\n1e9,0.25\n2e12,0.25\n";
  }
  setenv("THZMEC_ABSORPTION_TABLE", path.c_str(), 1);
  const auto table = resolve_absorption_table();
  CHECK(table->k_at(0.34e12) == doctest::Approx(0.25));
  unsetenv("THZMEC_ABSORPTION_TABLE");
  const auto fallback = resolve_absorption_table();
  CHECK(fallback->k_at(0.34e12) == doctest::Approx(0.003).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("bundled default table matches the shipped CSV") {
  const auto bundled = AbsorptionTable::bundled_default();
  const auto file = AbsorptionTable::from_csv_file(std::string(THZMEC_DATA_DIR) +
                                                   "/absorption_default.csv");
  REQUIRE(file.size() == bundled->size());
  for (std::size_t k = 0; k < file.size(); ++k) {
    CHECK(file.frequencies()[k] == doctest::Approx(bundled->frequencies()[k]).epsilon(1e-12));
    CHECK(file.coefficients()[k] == doctest::Approx(bundled->coefficients()[k]).epsilon(1e-12));
  }
  // Covers the full sweep range, 0.1 THz to beyond 1.0 THz + U*B.
  CHECK(bundled->min_frequency() <= 0.1e12);
  CHECK(bundled->max_frequency() >= 1.05e12);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "thzmec/baselines.hpp"
#include "thzmec/error.hpp"
#include "thzmec/queueing.hpp"
#include "thzmec/scenario.hpp"

using namespace thzmec;

namespace {

NetworkScenario custom_scenario(std::vector<Vec3> iots, std::vector<Vec3> mecs, int uavs,
                                std::vector<double> rates, double area = 400.0) {
  NetworkScenario::Data d;
  d.iot_positions = std::move(iots);
  d.mec_positions = std::move(mecs);
  d.arrival_rates = std::move(rates);
  d.num_uavs = uavs;
  d.uav_altitude = 20.0;
  d.task_input_bits = 8e7;
  d.iot_tx_power = 0.2;
  d.uav_tx_power_budget = 2.0;
  d.base_frequency = 0.34e12;
  d.subband_bandwidth = 1e9;
  d.num_subbands = static_cast<int>(d.iot_positions.size());
  d.noise_density = dbm_per_hz_to_w_per_hz(-174.0);
  d.queue = {2, 4.0};
  d.blockage = {1.7, 0.3, 0.2, 3.0, 0.3};
  d.area_side = area;
  d.absorption = std::make_shared<const AbsorptionTable>(AbsorptionTable::constant(0.005));
  return NetworkScenario::validate(std::move(d));
}

NetworkScenario tiny_instance(uint64_t seed) {
  ScenarioConfig cfg = ScenarioConfig::table1();
  cfg.num_iots = 3;
  cfg.num_mecs = 2;
  cfg.num_uavs = 1;
  cfg.num_subbands = 3;
  return generate_scenario(seed, cfg);
}

/// Exact mean service delay of a binary assignment with alpha fixed to zero.
double direct_only_delay(const NetworkScenario& sc, const std::vector<int>& mec,
                         const std::vector<int>& subband) {
  const int s = sc.queue().computing_units;
  const double mu = sc.queue().unit_service_rate;
  std::vector<double> load(sc.num_mecs(), 0.0);
  for (int i = 0; i < sc.num_iots(); ++i) load[mec[i]] += sc.arrival_rates()[i];
  double total = 0.0;
  for (int i = 0; i < sc.num_iots(); ++i) {
    total += direct_delay(sc, i, mec[i], subband[i]) + operation_delay(s, mu, load[mec[i]]);
  }
  return total / sc.num_iots();
}

}  // namespace

TEST_CASE("uo with no UAVs reduces to the nearest-stable direct evaluation") {
  const auto sc = custom_scenario({{10, 10, 0}, {180, 180, 0}}, {{20, 10, 0}, {170, 180, 0}},
                                  0, {1.2, 1.2}, 200.0);
  BaselineConfig cfg;
  const auto report = run_uo(sc, cfg, 1);
  // Greedy nearest: IoT 0 -> MEC 0 on u0, IoT 1 -> MEC 1 on u1.
  const double expected = direct_only_delay(sc, {0, 1}, {0, 1});
  CHECK(report.rounded.mean_service == doctest::Approx(expected).epsilon(1e-12));
  CHECK(binary_point_feasible(sc, report.rounded_vars));
}

TEST_CASE("uo and uao produce the same computation delay when nearest never overloads") {
  // Each IoT adjacent to its own MEC with ample capacity; both algorithms
  // end on the nearest association, so t_comp matches.
  const auto sc = custom_scenario({{10, 10, 0}, {180, 180, 0}}, {{20, 10, 0}, {170, 180, 0}},
                                  0, {1.2, 1.2}, 200.0);
  BaselineConfig cfg;
  const auto uo = run_uo(sc, cfg, 1);
  const auto uao = run_uao(sc, cfg, 1);
  CHECK(uo.rounded.mean_comp == doctest::Approx(uao.rounded.mean_comp).epsilon(1e-9));
}

TEST_CASE("uao relay heuristic") {
  // IoTs within 15 m of an MEC: the nearest UAV hovers at 20 m altitude, so
  // the ground MEC is always closer and no relay is selected.
  const auto sc = custom_scenario({{50, 50, 0}, {150, 150, 0}}, {{60, 50, 0}, {140, 150, 0}},
                                  1, {1.2, 1.2}, 200.0);
  BaselineConfig cfg;
  const auto report = run_uao(sc, cfg, 3);
  for (const auto& a : report.assignments) CHECK(a.uav == -1);

  // Single MEC: every assignment is forced onto it.
  const auto sc1 = custom_scenario({{50, 50, 0}, {150, 150, 0}}, {{100, 100, 0}}, 1,
                                   {1.2, 1.2}, 200.0);
  const auto forced = run_uao(sc1, cfg, 3);
  for (const auto& a : forced.assignments) CHECK(a.mec == 0);
  CHECK(binary_point_feasible(sc1, forced.rounded_vars));
}

TEST_CASE("nr-sca never uses relays and stalls in one linearisation when convex") {
  // Single MEC: the computation load is constant, the objective is linear in
  // z, so the first SCA step already solves the program.
  const auto sc = custom_scenario({{50, 50, 0}, {60, 40, 0}, {40, 70, 0}}, {{55, 55, 0}}, 2,
                                  {1.2, 1.2, 1.2}, 100.0);
  BaselineConfig cfg;
  const auto report = run_nr_sca(sc, cfg, 5);
  for (const auto& a : report.assignments) CHECK(a.uav == -1);
  for (double a : report.rounded_vars.relay_select) CHECK(a == 0.0);
  CHECK(report.objective_trace.size() <= 3);
  CHECK(binary_point_feasible(sc, report.rounded_vars));
}

TEST_CASE("nr-sca result can never beat the binary enumeration optimum") {
  for (uint64_t seed : {11, 12, 13}) {
    const auto sc = tiny_instance(seed);
    BaselineConfig cfg;
    const auto report = run_nr_sca(sc, cfg, seed);

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> mec(3), sub(3);
    for (mec[0] = 0; mec[0] < 2; ++mec[0])
      for (mec[1] = 0; mec[1] < 2; ++mec[1])
        for (mec[2] = 0; mec[2] < 2; ++mec[2])
          for (sub[0] = 0; sub[0] < 3; ++sub[0])
            for (sub[1] = 0; sub[1] < 3; ++sub[1])
              for (sub[2] = 0; sub[2] < 3; ++sub[2]) {
                if (sub[0] == sub[1] || sub[0] == sub[2] || sub[1] == sub[2]) continue;
                best = std::min(best, direct_only_delay(sc, mec, sub));
              }
    CHECK(report.rounded.mean_service >= best - 1e-9);
  }
}

TEST_CASE("genetic search: elitism, determinism, invariance") {
  const auto sc = tiny_instance(21);
  DelayEvaluator eval(sc);
  auto vars = initialize_variables(sc, 21, kStabilityMargin);
  eval.refresh_uav_gains(vars);

  // Enumerate the optimal chromosome for this (alpha, P, q) context.
  GaConfig probe;
  probe.population = 4;
  probe.generations = 0;
  auto fitness_of = [&](const Chromosome& ch) {
    Rng rng(1);
    return genetic_association_search(eval, vars, probe, rng, {ch, ch, ch, ch}).best_fitness;
  };
  Chromosome best_ch;
  double best_fit = std::numeric_limits<double>::infinity();
  Chromosome ch(3);
  for (int g0 = 0; g0 < 6; ++g0)
    for (int g1 = 0; g1 < 6; ++g1)
      for (int g2 = 0; g2 < 6; ++g2) {
        ch = {g0, g1, g2};
        const double f = fitness_of(ch);
        if (f < best_fit) {
          best_fit = f;
          best_ch = ch;
        }
      }
  REQUIRE(std::isfinite(best_fit));

  // Elitism: a population seeded with the optimum returns it.
  GaConfig cfg;
  cfg.population = 8;
  cfg.generations = 12;
  Rng rng(5);
  const auto seeded = genetic_association_search(eval, vars, cfg, rng, {best_ch});
  CHECK(seeded.best_fitness == doctest::Approx(best_fit).epsilon(1e-15));

  // Zero mutation on a uniform population leaves it invariant.
  GaConfig frozen;
  frozen.population = 6;
  frozen.generations = 10;
  frozen.mutation_rate = 0.0;
  Rng rng2(5);
  const std::vector<Chromosome> uniform(6, best_ch);
  const auto still = genetic_association_search(eval, vars, frozen, rng2, uniform);
  CHECK(still.best == best_ch);
  for (double f : still.best_trace) CHECK(f == doctest::Approx(best_fit).epsilon(1e-15));

  // Determinism: identical seeds give identical traces.
  Rng ra(9), rb(9);
  GaConfig small;
  small.population = 10;
  small.generations = 30;
  const auto run_a = genetic_association_search(eval, vars, small, ra);
  const auto run_b = genetic_association_search(eval, vars, small, rb);
  CHECK(run_a.best == run_b.best);
  CHECK(run_a.best_trace == run_b.best_trace);

  // Default-size GA lands within 5% of the enumeration optimum.
  GaConfig full;
  Rng rc(3);
  const auto searched = genetic_association_search(eval, vars, full, rc);
  CHECK(searched.best_fitness <= best_fit * 1.05);
}

TEST_CASE("bcd-sca objective trace is non-increasing and the report is feasible") {
  for (uint64_t seed : {31, 32}) {
    ScenarioConfig cfg6 = ScenarioConfig::table1();
    cfg6.num_iots = 6;
    cfg6.num_mecs = 2;
    cfg6.num_uavs = 1;
    cfg6.area_side = 200.0;
    const auto sc = generate_scenario(seed, cfg6);
    BaselineConfig cfg;
    const auto report = run_bcd_sca(sc, cfg, seed);
    for (std::size_t k = 1; k < report.objective_trace.size(); ++k) {
      CHECK(report.objective_trace[k] <= report.objective_trace[k - 1] + 1e-12);
    }
    CHECK(binary_point_feasible(sc, report.rounded_vars));
  }
}

TEST_CASE("exhaustive on a degenerate instance equals direct evaluation") {
  const auto sc = custom_scenario({{30, 0, 0}}, {{60, 0, 0}}, 0, {1.2}, 100.0);
  QuantizationGrid grid{5, 9, 1e8};
  const auto report = run_exhaustive(sc, grid);
  const double expected = direct_delay(sc, 0, 0, 0) + operation_delay(2, 4.0, 1.2);
  CHECK(report.rounded.mean_service == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("exhaustive dominates every heuristic on a tiny instance") {
  const auto sc = tiny_instance(2);
  QuantizationGrid grid{5, 9, 1e8};
  BaselineConfig cfg;
  const auto ex = run_exhaustive(sc, grid, cfg);
  CHECK(binary_point_feasible(sc, ex.rounded_vars));

  GaConfig ga;
  const RunReport heuristics[] = {
      run_uo(sc, cfg, 2),      run_uao(sc, cfg, 2),        run_nr_sca(sc, cfg, 2),
      run_uo_guao(sc, cfg, ga, 2), run_bcd_sca(sc, cfg, 2),
  };
  for (const auto& h : heuristics) {
    CHECK(ex.rounded.mean_service <= h.rounded.mean_service);  // exact, no tolerance
  }
}

TEST_CASE("exhaustive refuses oversized grids with the computed count") {
  const auto sc = generate_scenario(1, ScenarioConfig::table1());
  QuantizationGrid grid{20, 40, 1e8};
  CHECK_THROWS_WITH_AS(static_cast<void>(run_exhaustive(sc, grid)),
                       doctest::Contains("exceed"), Error);
  QuantizationGrid bad{1, 9, 1e8};
  CHECK_THROWS_AS(static_cast<void>(run_exhaustive(sc, bad)), Error);
}

TEST_CASE("all algorithms emit schema-identical reports") {
  const auto sc = tiny_instance(4);
  BaselineConfig cfg;
  GaConfig ga;
  PddConfig pdd_cfg;
  const RunReport reports[] = {
      run_pdd(sc, pdd_cfg, 4),     run_uo(sc, cfg, 4),
      run_uao(sc, cfg, 4),         run_nr_sca(sc, cfg, 4),
      run_uo_guao(sc, cfg, ga, 4), run_bcd_sca(sc, cfg, 4),
      run_exhaustive(sc, {5, 9, 1e8}, cfg),
  };
  for (const auto& r : reports) {
    const std::string json = report_to_json_text(r);
    for (const char* key :
         {"\"algorithm\"", "\"seed\"", "\"converged\"", "\"objective_trace\"",
          "\"violation_trace\"", "\"relaxed\"", "\"rounded\"", "\"assignments\"",
          "\"uav_positions\"", "\"wall_time_s\""}) {
      CHECK_MESSAGE(json.find(key) != std::string::npos, r.algorithm, " missing ", key);
    }
    CHECK(static_cast<int>(r.assignments.size()) == sc.num_iots());
  }
}

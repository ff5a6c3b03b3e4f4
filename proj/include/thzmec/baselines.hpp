#pragma once

#include <cstdint>

#include "thzmec/pdd.hpp"
#include "thzmec/report.hpp"
#include "thzmec/rng.hpp"

namespace thzmec {

struct BaselineConfig {
  double eps = 1e-4;        // objective-change stopping rule
  int max_sweeps = 30;      // block sweeps (UO, BCD-SCA) / SCA steps (NR-SCA)
  int sca_steps_per_sweep = 8;
  double sca_damping = 0.5;
  double stability_margin = kStabilityMargin;
  PgOptions pg_position{1e-8, 150, 1.0, 1e-4, 0.5, 60};
  PgOptions pg_association{1e-7, 250, 1.0, 1e-4, 0.5, 60};
};

struct GaConfig {
  int population = 60;
  int generations = 200;
  int tournament = 3;
  double crossover_rate = 0.9;
  double mutation_rate = -1.0;  // < 0 means 1 / chromosome length
  int elitism = 2;
};

/// One GA chromosome: per-IoT flat (mec * U + subband) gene.
using Chromosome = std::vector<int>;

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;  // mean service delay, +inf when infeasible
  std::vector<double> best_trace;  // per generation
};

/// Deterministic tournament GA over binary associations at fixed UAV
/// variables. Elitism guarantees the returned fitness never exceeds the best
/// seeded candidate's.
GaResult genetic_association_search(const DelayEvaluator& eval, const DecisionVariables& vars,
                                    const GaConfig& config, Rng& rng,
                                    const std::vector<Chromosome>& seeded = {});

struct QuantizationGrid {
  int n_q1 = 5;   // power levels
  int n_q2 = 9;   // position levels per axis
  double enum_cap = 1e8;
};

// The five comparison algorithms of the evaluation section, plus the
// quantized exhaustive oracle. All emit PDD-shaped RunReports.
RunReport run_uo(const NetworkScenario& scenario, const BaselineConfig& config, uint64_t seed);
RunReport run_uao(const NetworkScenario& scenario, const BaselineConfig& config, uint64_t seed);
RunReport run_nr_sca(const NetworkScenario& scenario, const BaselineConfig& config,
                     uint64_t seed);
RunReport run_uo_guao(const NetworkScenario& scenario, const BaselineConfig& config,
                      const GaConfig& ga, uint64_t seed);
RunReport run_bcd_sca(const NetworkScenario& scenario, const BaselineConfig& config,
                      uint64_t seed);

/// Brute force over binary relays, binary associations and the quantized
/// power/position grids; every enumerated (alpha, z) is additionally scored
/// through the shared continuous finaliser, so the returned optimum cannot
/// exceed any heuristic's rounded value. Refuses instances whose grid count
/// exceeds the cap.
RunReport run_exhaustive(const NetworkScenario& scenario, const QuantizationGrid& grid,
                         const BaselineConfig& config = {});

}  // namespace thzmec

#pragma once

#include <cstdint>

#include "thzmec/report.hpp"
#include "thzmec/solver_common.hpp"

namespace thzmec {

struct PddConfig {
  double eps_inner = 1e-4;  // epsilon_2, AL-objective change per sweep
  double eps_outer = 1e-3;  // epsilon_1, violation indicator h
  int n_max = 50;
  int m_max = 60;
  double shrink_c = 0.8;
  double rho_alpha0 = 1.0;
  double rho_z0 = 1.0;
  // Theorem-form switches: the binary relay rule engages once rho_alpha
  // drops below this threshold; the Lambert-W power form engages whenever
  // the association is within binary_tol of binary (it is exact there
  // regardless of the penalty level, since the power block carries no
  // penalty terms).
  double theorem_switch_rho = 1e-2;
  double binary_tol = 0.05;
  // Dual ascent fires only when the violation indicator is already below
  // this threshold; larger residuals only tighten the penalty.
  double dual_ascent_threshold = 0.2;
  double stability_margin = kStabilityMargin;

  PgOptions pg_relay{1e-10, 200, 1.0, 1e-4, 0.5, 60};
  PgOptions pg_power{1e-9, 200, 1.0, 1e-4, 0.5, 60};
  PgOptions pg_position{1e-8, 150, 1.0, 1e-4, 0.5, 60};
  PgOptions pg_association{1e-7, 250, 1.0, 1e-4, 0.5, 60};
};

// Block solves of the inner loop. Each updates its block in place and never
// increases the objective it minimises.
void solve_sp1(const DelayEvaluator& eval, DecisionVariables& vars, const DualState& duals,
               const PddConfig& config);
void solve_sp2(const DelayEvaluator& eval, DecisionVariables& vars, const PddConfig& config);
/// Returns the number of relay hops violating the convexity condition at the
/// starting point (logged, not fatal). Refreshes the evaluator's gain caches.
int solve_sp3(DelayEvaluator& eval, DecisionVariables& vars, const PddConfig& config);
void solve_sp4(const DelayEvaluator& eval, DecisionVariables& vars, const DualState& duals,
               const PddConfig& config);

/// Dual ascent on all six multiplier families followed by the penalty shrink.
DualState outer_update(const DecisionVariables& vars, DualState duals);

/// Algorithm 1: inner block sweeps until the AL objective stalls, outer dual
/// and penalty updates until the violation indicator h drops below eps_outer.
RunReport run_pdd(const NetworkScenario& scenario, const PddConfig& config, uint64_t seed);

// Objective adapters exposed for gradient checking and the oracle tests.
// Each evaluates the exact block objective the solver minimises.
struct Sp2Problem {
  Sp2Problem(const DelayEvaluator& eval, const DecisionVariables& vars);
  double value(std::span<const double> power) const;
  void gradient(std::span<const double> power, std::span<double> grad) const;
  BoxSimplexFeasibleSet feasible_set() const;
  std::vector<double> start() const;

 private:
  const DelayEvaluator* eval_;
  const DecisionVariables* vars_;
};

struct Sp3Problem {
  Sp3Problem(const DelayEvaluator& eval, const DecisionVariables& vars);
  double value(std::span<const double> coords) const;  // [x0, y0, x1, y1, ...]
  void gradient(std::span<const double> coords, std::span<double> grad) const;
  std::vector<double> start() const;

 private:
  const DelayEvaluator* eval_;
  const DecisionVariables* vars_;
};

struct Sp4Problem {
  Sp4Problem(const DelayEvaluator& eval, const DecisionVariables& vars, const DualState& duals,
             double stability_margin = kStabilityMargin);
  double value(std::span<const double> z) const;
  void gradient(std::span<const double> z, std::span<double> grad) const;
  BoxSimplexFeasibleSet feasible_set() const;
  std::vector<double> start() const { return vars_->association; }

 private:
  const DelayEvaluator* eval_;
  const DecisionVariables* vars_;
  const DualState* duals_;
  double margin_;
  std::vector<double> comm_coeff_;  // t_comm coefficient per (i, j, u)
};

}  // namespace thzmec

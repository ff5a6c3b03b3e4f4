#include "thzmec/pdd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "thzmec/error.hpp"
#include "thzmec/queueing.hpp"

namespace thzmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------
// SP1: relay selection
// ---------------------------------------------------------------------------

namespace {

// Per-user convex solve of the relaxed relay row with the slack row fixed.
void solve_relay_row_relaxed(DecisionVariables& vars, const DualState& duals,
                             const RelayPricing& pricing, int i, const PgOptions& opts) {
  const int num_m = vars.num_uavs;
  const double rho = duals.rho_alpha;
  std::vector<double> delta(num_m), slack(num_m), eta1(num_m), eta2(num_m);
  for (int m = 0; m < num_m; ++m) {
    delta[m] = pricing.t_relay[i * num_m + m] - pricing.t_direct[i];
    slack[m] = vars.relay_slack[vars.am(i, m)];
    eta1[m] = duals.eta_alpha1[vars.am(i, m)];
    eta2[m] = duals.eta_alpha2[vars.am(i, m)];
  }

  auto value = [&](std::span<const double> a) {
    double total = 0.0;
    for (int m = 0; m < num_m; ++m) {
      const double r1 = a[m] * (slack[m] - 1.0) + rho * eta1[m];
      const double r2 = a[m] - slack[m] + rho * eta2[m];
      total += a[m] * delta[m] + (r1 * r1 + r2 * r2) / (2.0 * rho);
    }
    return total;
  };
  auto gradient = [&](std::span<const double> a, std::span<double> g) {
    for (int m = 0; m < num_m; ++m) {
      const double r1 = a[m] * (slack[m] - 1.0) + rho * eta1[m];
      const double r2 = a[m] - slack[m] + rho * eta2[m];
      g[m] = delta[m] + ((slack[m] - 1.0) * r1 + r2) / rho;
    }
  };

  auto set = BoxSimplexFeasibleSet::box(num_m, 0.0, 1.0);
  BoxSimplexFeasibleSet::Group cap;
  cap.indices.resize(num_m);
  for (int m = 0; m < num_m; ++m) cap.indices[m] = m;
  cap.rhs = 1.0;
  set.add_group(std::move(cap));

  std::vector<double> a0(num_m);
  for (int m = 0; m < num_m; ++m) a0[m] = vars.relay_select[vars.am(i, m)];
  auto result = projected_gradient_min(value, gradient, set, std::move(a0), opts);
  for (int m = 0; m < num_m; ++m) vars.relay_select[vars.am(i, m)] = result.x[m];
}

}  // namespace

void solve_sp1(const DelayEvaluator& eval, DecisionVariables& vars, const DualState& duals,
               const PddConfig& config) {
  if (vars.num_uavs == 0) {
    update_relay_slack(vars, duals);
    return;
  }
  const RelayPricing pricing = compute_relay_pricing(eval, vars);
  update_relay_slack(vars, duals);
  if (duals.rho_alpha < config.theorem_switch_rho) {
    apply_relay_rule(vars, pricing);
  } else {
    for (int i = 0; i < vars.num_iots; ++i) {
      solve_relay_row_relaxed(vars, duals, pricing, i, config.pg_relay);
    }
  }
  update_relay_slack(vars, duals);
}

// ---------------------------------------------------------------------------
// SP2: power control
// ---------------------------------------------------------------------------

void solve_sp2(const DelayEvaluator& eval, DecisionVariables& vars, const PddConfig& config) {
  if (vars.num_uavs == 0) return;
  if (association_near_binary(vars, config.binary_tol)) {
    solve_power_closed_form(eval, vars);
  } else {
    PgOptions opts = config.pg_power;
    opts.initial_step = eval.scenario().uav_tx_power_budget();
    solve_power_pg(eval, vars, opts);
  }
}

// ---------------------------------------------------------------------------
// SP3: placement
// ---------------------------------------------------------------------------

int solve_sp3(DelayEvaluator& eval, DecisionVariables& vars, const PddConfig& config) {
  PgOptions opts = config.pg_position;
  opts.initial_step = std::max(1.0, eval.scenario().area_side());
  return solve_positions_pg(eval, vars, opts);
}

// ---------------------------------------------------------------------------
// SP4.1: user-resource association
// ---------------------------------------------------------------------------

Sp4Problem::Sp4Problem(const DelayEvaluator& eval, const DecisionVariables& vars,
                       const DualState& duals, double stability_margin)
    : eval_(&eval), vars_(&vars), duals_(&duals), margin_(stability_margin),
      comm_coeff_(communication_coefficients(eval, vars)) {}

double Sp4Problem::value(std::span<const double> z) const {
  const auto& sc = eval_->scenario();
  const int num_i = vars_->num_iots;
  const int num_j = vars_->num_mecs;
  const int num_u = vars_->num_subbands;
  const int s = sc.queue().computing_units;
  const double mu = sc.queue().unit_service_rate;
  const double rho = duals_->rho_z;

  double total = 0.0;
  std::vector<double> load(num_j, 0.0), weight(num_j, 0.0);
  for (int i = 0; i < num_i; ++i) {
    const double rate = sc.arrival_rates()[i];
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        const double zv = z[vars_->zi(i, j, u)];
        total += zv * comm_coeff_[vars_->zi(i, j, u)];
        load[j] += zv * rate;
        weight[j] += zv;
      }
    }
  }
  for (int j = 0; j < num_j; ++j) {
    if (weight[j] <= 0.0) continue;
    if (load[j] >= s * mu) return kInf;
    total += weight[j] * operation_delay_upper(s, mu, load[j]);
  }

  // Dual-shifted quadratic penalties of (P2), at the current slack point.
  double pen = 0.0;
  for (int i = 0; i < num_i; ++i) {
    double row = 0.0;
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        const int k = vars_->zi(i, j, u);
        const double zv = z[k];
        const double zs = vars_->association_slack[k];
        const double r1 = zv * (zs - 1.0) + rho * duals_->eta_z1[k];
        const double r2 = zv - zs + rho * duals_->eta_z2[k];
        pen += r1 * r1 + r2 * r2;
        row += zv;
      }
    }
    const double r = row - 1.0 + rho * duals_->eta_z_i[i];
    pen += r * r;
  }
  for (int u = 0; u < num_u; ++u) {
    double col = 0.0;
    for (int i = 0; i < num_i; ++i) {
      for (int j = 0; j < num_j; ++j) col += z[vars_->zi(i, j, u)];
    }
    const double r = col - 1.0 + rho * duals_->eta_z_u[u];
    pen += r * r;
  }
  return total + pen / (2.0 * rho);
}

void Sp4Problem::gradient(std::span<const double> z, std::span<double> grad) const {
  const auto& sc = eval_->scenario();
  const int num_i = vars_->num_iots;
  const int num_j = vars_->num_mecs;
  const int num_u = vars_->num_subbands;
  const int s = sc.queue().computing_units;
  const double mu = sc.queue().unit_service_rate;
  const double rho = duals_->rho_z;

  std::vector<double> load(num_j, 0.0), weight(num_j, 0.0);
  std::vector<double> row_sum(num_i, 0.0), col_sum(num_u, 0.0);
  for (int i = 0; i < num_i; ++i) {
    const double rate = sc.arrival_rates()[i];
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        const double zv = z[vars_->zi(i, j, u)];
        load[j] += zv * rate;
        weight[j] += zv;
        row_sum[i] += zv;
        col_sum[u] += zv;
      }
    }
  }
  std::vector<double> t_up(num_j, 0.0), t_up_d(num_j, 0.0);
  for (int j = 0; j < num_j; ++j) {
    t_up[j] = operation_delay_upper(s, mu, load[j]);
    t_up_d[j] = operation_delay_upper_derivative(s, mu, load[j]);
  }

  for (int i = 0; i < num_i; ++i) {
    const double rate = sc.arrival_rates()[i];
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        const int k = vars_->zi(i, j, u);
        const double zv = z[k];
        const double zs = vars_->association_slack[k];
        const double r1 = zv * (zs - 1.0) + rho * duals_->eta_z1[k];
        const double r2 = zv - zs + rho * duals_->eta_z2[k];
        double g = comm_coeff_[k] + t_up[j] + weight[j] * t_up_d[j] * rate;
        g += ((zs - 1.0) * r1 + r2 + (row_sum[i] - 1.0 + rho * duals_->eta_z_i[i]) +
              (col_sum[u] - 1.0 + rho * duals_->eta_z_u[u])) /
             rho;
        grad[k] = g;
      }
    }
  }
}

BoxSimplexFeasibleSet Sp4Problem::feasible_set() const {
  const auto& sc = eval_->scenario();
  auto set = BoxSimplexFeasibleSet::box(vars_->association.size(), 0.0, 1.0);
  const double cap = sc.queue().total_service_rate() - margin_;
  for (int j = 0; j < vars_->num_mecs; ++j) {
    BoxSimplexFeasibleSet::Group g;
    for (int i = 0; i < vars_->num_iots; ++i) {
      for (int u = 0; u < vars_->num_subbands; ++u) {
        g.indices.push_back(vars_->zi(i, j, u));
        g.weights.push_back(sc.arrival_rates()[i]);
      }
    }
    g.rhs = cap;
    g.equality = false;
    set.add_group(std::move(g));
  }
  return set;
}

void solve_sp4(const DelayEvaluator& eval, DecisionVariables& vars, const DualState& duals,
               const PddConfig& config) {
  Sp4Problem problem(eval, vars, duals, config.stability_margin);
  auto result = projected_gradient_min(
      [&](std::span<const double> z) { return problem.value(z); },
      [&](std::span<const double> z, std::span<double> g) { problem.gradient(z, g); },
      problem.feasible_set(), problem.start(), config.pg_association);

  DecisionVariables candidate = vars;
  candidate.association = std::move(result.x);
  update_association_slack(candidate, duals);

  // Once the penalty dominates, the block minimiser is a binary matching;
  // gradient steps cannot hop between matchings, so offer the snapped one
  // as a second candidate and keep whichever scores better.
  if (duals.rho_z < config.theorem_switch_rho) {
    DecisionVariables snapped = candidate;
    bool snap_ok = true;
    try {
      round_association(eval, snapped, config.stability_margin);
    } catch (const Error&) {
      snap_ok = false;
    }
    if (snap_ok) {
      update_association_slack(snapped, duals);
      if (eval.al_objective(snapped, duals, DelayBound::upper) <
          eval.al_objective(candidate, duals, DelayBound::upper)) {
        candidate = std::move(snapped);
      }
    }
  }
  vars = std::move(candidate);
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

namespace {

// Multipliers live in a bounded set. Without the bound, a residual the
// iterates cannot sign-match (the bilinear slack constraints) grows its
// dual like 1/rho and keeps displacing the penalty target as fast as the
// penalty tightens, freezing the violation indicator.
constexpr double kDualBound = 1e3;

double clip_dual(double eta) { return std::clamp(eta, -kDualBound, kDualBound); }

}  // namespace

DualState outer_update(const DecisionVariables& vars, DualState duals) {
  for (std::size_t k = 0; k < vars.relay_select.size(); ++k) {
    const double a = vars.relay_select[k];
    const double as = vars.relay_slack[k];
    duals.eta_alpha1[k] = clip_dual(duals.eta_alpha1[k] + a * (as - 1.0) / duals.rho_alpha);
    duals.eta_alpha2[k] = clip_dual(duals.eta_alpha2[k] + (a - as) / duals.rho_alpha);
  }
  for (std::size_t k = 0; k < vars.association.size(); ++k) {
    const double z = vars.association[k];
    const double zs = vars.association_slack[k];
    duals.eta_z1[k] = clip_dual(duals.eta_z1[k] + z * (zs - 1.0) / duals.rho_z);
    duals.eta_z2[k] = clip_dual(duals.eta_z2[k] + (z - zs) / duals.rho_z);
  }
  for (int u = 0; u < vars.num_subbands; ++u) {
    double col = 0.0;
    for (int i = 0; i < vars.num_iots; ++i) {
      for (int j = 0; j < vars.num_mecs; ++j) col += vars.association[vars.zi(i, j, u)];
    }
    duals.eta_z_u[u] = clip_dual(duals.eta_z_u[u] + (col - 1.0) / duals.rho_z);
  }
  for (int i = 0; i < vars.num_iots; ++i) {
    duals.eta_z_i[i] = clip_dual(duals.eta_z_i[i] + (vars.z_row_sum(i) - 1.0) / duals.rho_z);
  }
  duals.rho_alpha *= duals.shrink_c;
  duals.rho_z *= duals.shrink_c;
  return duals;
}

// ---------------------------------------------------------------------------
// Algorithm 1
// ---------------------------------------------------------------------------

RunReport run_pdd(const NetworkScenario& scenario, const PddConfig& config, uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();
  require(config.eps_inner > 0.0 && config.eps_outer > 0.0, ErrorCode::invalid_argument,
          "pdd: tolerances must be positive");
  require(config.n_max >= 1 && config.m_max >= 1, ErrorCode::invalid_argument,
          "pdd: iteration caps must be >= 1");
  require(config.shrink_c > 0.0 && config.shrink_c < 1.0, ErrorCode::invalid_argument,
          "pdd: shrink factor must lie in (0, 1)");

  DelayEvaluator eval(scenario);
  DecisionVariables vars = initialize_variables(scenario, seed, config.stability_margin);
  eval.refresh_uav_gains(vars);
  DualState duals =
      DualState::initial(scenario, config.rho_alpha0, config.rho_z0, config.shrink_c);

  RunReport report;
  report.algorithm = "pdd";
  report.seed = seed;

  int convexity_warnings = 0;
  bool converged = false;
  int outer = 0;
  double al = eval.al_objective(vars, duals, DelayBound::upper);
  for (outer = 1; outer <= config.m_max; ++outer) {
    double prev_sweep = al;
    int sweeps = 0;
    for (int inner = 1; inner <= config.n_max; ++inner) {
      report.inner_iterations++;
      ++sweeps;

      // SP1 and SP2 form one guarded unit: relay activation is only
      // meaningful once the power block has priced it.
      DecisionVariables saved = vars;
      solve_sp1(eval, vars, duals, config);
      solve_sp2(eval, vars, config);
      double candidate = eval.al_objective(vars, duals, DelayBound::upper);
      if (!(candidate <= al)) {
        vars = std::move(saved);
      } else {
        al = candidate;
      }

      saved = vars;
      convexity_warnings += solve_sp3(eval, vars, config);
      candidate = eval.al_objective(vars, duals, DelayBound::upper);
      if (!(candidate <= al)) {
        vars = std::move(saved);
        eval.refresh_uav_gains(vars);
      } else {
        al = candidate;
      }

      saved = vars;
      solve_sp4(eval, vars, duals, config);
      candidate = eval.al_objective(vars, duals, DelayBound::upper);
      if (!(candidate <= al)) {
        vars = std::move(saved);
      } else {
        al = candidate;
      }

      report.objective_trace.push_back(al);
      const double change = std::abs(prev_sweep - al);
      prev_sweep = al;
      if (change <= config.eps_inner) break;
    }
    report.sweeps_per_outer.push_back(sweeps);

    const double h = violation(vars);
    report.violation_trace.push_back(h);
    report.final_violation = h;
    if (h <= config.eps_outer) {
      converged = true;
      break;
    }
    if (h <= config.dual_ascent_threshold) {
      duals = outer_update(vars, duals);
    } else {
      // Large residuals carry no usable multiplier information and the
      // residual/rho ascent step would swing the penalty targets; only the
      // penalty tightens, as in the reference double-loop scheme.
      duals.rho_alpha *= duals.shrink_c;
      duals.rho_z *= duals.shrink_c;
    }
    al = eval.al_objective(vars, duals, DelayBound::upper);
  }
  report.outer_iterations = std::min(outer, config.m_max);
  report.converged = converged;
  report.termination_reason = converged ? "violation_tolerance" : "outer_iteration_cap";
  if (convexity_warnings > 0) {
    report.notes.push_back("placement convexity condition (g < 41.412) violated on " +
                           std::to_string(convexity_warnings) + " hop evaluations");
  }

  report.relaxed_vars = vars;
  report.relaxed = summarize_delays(scenario, vars);

  // Snap to the feasibility-respecting binary point, then re-solve the
  // continuous blocks there through the shared finaliser.
  round_relay(vars);
  report.rounding_repaired = round_association(eval, vars, config.stability_margin);
  finalize_solution(eval, vars);
  report.rounded_vars = vars;
  report.rounded = summarize_delays(scenario, vars);
  report.assignments = extract_assignments(vars);

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Objective adapters for gradient checks
// ---------------------------------------------------------------------------

// Rebuilding small temporaries per call keeps the adapters simple; these run
// in tests, not in solver loops.
Sp2Problem::Sp2Problem(const DelayEvaluator& eval, const DecisionVariables& vars)
    : eval_(&eval), vars_(&vars) {}

double Sp2Problem::value(std::span<const double> power) const {
  DecisionVariables tmp = *vars_;
  tmp.uav_power.assign(power.begin(), power.end());
  double total = 0.0;
  for (int i = 0; i < tmp.num_iots; ++i) total += eval_->communication_delay(tmp, i);
  return total;
}

void Sp2Problem::gradient(std::span<const double> power, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto& sc = eval_->scenario();
  const double c = sc.task_input_bits() * M_LN2 / sc.subband_bandwidth();
  for (int i = 0; i < vars_->num_iots; ++i) {
    for (int m = 0; m < vars_->num_uavs; ++m) {
      const double a = vars_->relay_select[vars_->am(i, m)];
      if (a <= 0.0) continue;
      const int k = vars_->am(i, m);
      for (int j = 0; j < vars_->num_mecs; ++j) {
        for (int u = 0; u < vars_->num_subbands; ++u) {
          const double z = vars_->association[vars_->zi(i, j, u)];
          if (z <= 0.0) continue;
          const double gamma = eval_->hop2_gamma(m, j, u);
          const double lg = std::log1p(power[k] * gamma);
          grad[k] -= a * z * c * gamma / ((1.0 + power[k] * gamma) * lg * lg);
        }
      }
    }
  }
}

BoxSimplexFeasibleSet Sp2Problem::feasible_set() const {
  const double budget = eval_->scenario().uav_tx_power_budget();
  auto set = BoxSimplexFeasibleSet::box(vars_->uav_power.size(), 0.0, budget);
  for (int m = 0; m < vars_->num_uavs; ++m) {
    BoxSimplexFeasibleSet::Group g;
    for (int i = 0; i < vars_->num_iots; ++i) g.indices.push_back(vars_->am(i, m));
    g.rhs = budget;
    set.add_group(std::move(g));
  }
  return set;
}

std::vector<double> Sp2Problem::start() const { return vars_->uav_power; }

Sp3Problem::Sp3Problem(const DelayEvaluator& eval, const DecisionVariables& vars)
    : eval_(&eval), vars_(&vars) {}

double Sp3Problem::value(std::span<const double> coords) const {
  DecisionVariables tmp = *vars_;
  for (int m = 0; m < tmp.num_uavs; ++m) {
    tmp.uav_positions[m].x = coords[2 * m];
    tmp.uav_positions[m].y = coords[2 * m + 1];
  }
  DelayEvaluator fresh(eval_->scenario());
  fresh.refresh_uav_gains(tmp);
  double total = 0.0;
  for (int i = 0; i < tmp.num_iots; ++i) total += fresh.communication_delay(tmp, i);
  return total;
}

void Sp3Problem::gradient(std::span<const double> coords, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto& sc = eval_->scenario();
  const auto& budget = eval_->link_budget();
  const double c = sc.task_input_bits() * M_LN2 / sc.subband_bandwidth();
  const double h2 = sc.uav_altitude() * sc.uav_altitude();
  for (int i = 0; i < vars_->num_iots; ++i) {
    for (int m = 0; m < vars_->num_uavs; ++m) {
      const double a = vars_->relay_select[vars_->am(i, m)];
      if (a <= 0.0) continue;
      const double qx = coords[2 * m], qy = coords[2 * m + 1];
      const double p2 = vars_->uav_power[vars_->am(i, m)];
      for (int j = 0; j < vars_->num_mecs; ++j) {
        for (int u = 0; u < vars_->num_subbands; ++u) {
          const double z = vars_->association[vars_->zi(i, j, u)];
          if (z <= 0.0) continue;
          const double w = a * z;
          // hop 1: IoT -> UAV at P_IoT
          {
            const double dx = qx - sc.iot_positions()[i].x;
            const double dy = qy - sc.iot_positions()[i].y;
            const double d = std::sqrt(dx * dx + dy * dy + h2);
            const double snr = budget.snr(d, sc.iot_tx_power(), u);
            const double lg = std::log1p(snr);
            const double dtdd =
                c * snr * (budget.subband_k[u] + 2.0 / d) / ((1.0 + snr) * lg * lg);
            grad[2 * m] += w * dtdd * dx / d;
            grad[2 * m + 1] += w * dtdd * dy / d;
          }
          // hop 2: UAV -> MEC at P_{i,m}
          if (p2 > 0.0) {
            const double dx = qx - sc.mec_positions()[j].x;
            const double dy = qy - sc.mec_positions()[j].y;
            const double d = std::sqrt(dx * dx + dy * dy + h2);
            const double snr = budget.snr(d, p2, u);
            const double lg = std::log1p(snr);
            const double dtdd =
                c * snr * (budget.subband_k[u] + 2.0 / d) / ((1.0 + snr) * lg * lg);
            grad[2 * m] += w * dtdd * dx / d;
            grad[2 * m + 1] += w * dtdd * dy / d;
          }
        }
      }
    }
  }
}

std::vector<double> Sp3Problem::start() const {
  std::vector<double> q(2 * vars_->num_uavs);
  for (int m = 0; m < vars_->num_uavs; ++m) {
    q[2 * m] = vars_->uav_positions[m].x;
    q[2 * m + 1] = vars_->uav_positions[m].y;
  }
  return q;
}

}  // namespace thzmec

#include "thzmec/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "thzmec/error.hpp"
#include "thzmec/queueing.hpp"

namespace thzmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double exact_mean_delay(const DelayEvaluator& eval, const DecisionVariables& vars) {
  return eval.evaluate(vars, nullptr, DelayBound::exact).mean_service_delay;
}

void fill_summaries(RunReport& report, const NetworkScenario& sc,
                    const DecisionVariables& relaxed, const DecisionVariables& rounded) {
  report.relaxed_vars = relaxed;
  report.rounded_vars = rounded;
  report.relaxed = summarize_delays(sc, relaxed);
  report.rounded = summarize_delays(sc, rounded);
  report.assignments = extract_assignments(rounded);
}

// ---------------------------------------------------------------------------
// Association polytope and SCA machinery
// ---------------------------------------------------------------------------

// Hard relaxation of constraints (3)-(5): per-IoT sum-to-one, per-sub-band
// at-most-one, per-MEC load caps. Three families, so projection runs through
// Dykstra's scheme.
BoxSimplexFeasibleSet association_polytope(const NetworkScenario& sc, double margin) {
  const int num_i = sc.num_iots();
  const int num_j = sc.num_mecs();
  const int num_u = sc.num_subbands();
  auto zi = [&](int i, int j, int u) { return (i * num_j + j) * num_u + u; };
  auto set = BoxSimplexFeasibleSet::box(static_cast<std::size_t>(num_i) * num_j * num_u, 0.0, 1.0);
  for (int i = 0; i < num_i; ++i) {
    BoxSimplexFeasibleSet::Group g;
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) g.indices.push_back(zi(i, j, u));
    }
    g.rhs = 1.0;
    g.equality = true;
    g.family = 0;
    set.add_group(std::move(g));
  }
  for (int u = 0; u < num_u; ++u) {
    BoxSimplexFeasibleSet::Group g;
    for (int i = 0; i < num_i; ++i) {
      for (int j = 0; j < num_j; ++j) g.indices.push_back(zi(i, j, u));
    }
    g.rhs = 1.0;
    g.equality = false;
    g.family = 1;
    set.add_group(std::move(g));
  }
  const double cap = sc.queue().total_service_rate() - margin;
  for (int j = 0; j < num_j; ++j) {
    BoxSimplexFeasibleSet::Group g;
    for (int i = 0; i < num_i; ++i) {
      for (int u = 0; u < num_u; ++u) {
        g.indices.push_back(zi(i, j, u));
        g.weights.push_back(sc.arrival_rates()[i]);
      }
    }
    g.rhs = cap;
    g.equality = false;
    g.family = 2;
    set.add_group(std::move(g));
  }
  return set;
}

struct AssociationContext {
  const NetworkScenario* sc;
  std::vector<double> comm_coeff;
  int num_i, num_j, num_u;

  AssociationContext(const DelayEvaluator& eval, const DecisionVariables& vars)
      : sc(&eval.scenario()), comm_coeff(communication_coefficients(eval, vars)),
        num_i(vars.num_iots), num_j(vars.num_mecs), num_u(vars.num_subbands) {}

  int zi(int i, int j, int u) const { return (i * num_j + j) * num_u + u; }

  void loads_and_weights(std::span<const double> z, std::vector<double>& load,
                         std::vector<double>& weight) const {
    load.assign(num_j, 0.0);
    weight.assign(num_j, 0.0);
    for (int i = 0; i < num_i; ++i) {
      const double rate = sc->arrival_rates()[i];
      for (int j = 0; j < num_j; ++j) {
        for (int u = 0; u < num_u; ++u) {
          const double zv = z[zi(i, j, u)];
          load[j] += zv * rate;
          weight[j] += zv;
        }
      }
    }
  }

  double total(std::span<const double> z, DelayBound bound) const {
    const int s = sc->queue().computing_units;
    const double mu = sc->queue().unit_service_rate;
    double sum = 0.0;
    for (std::size_t k = 0; k < comm_coeff.size(); ++k) sum += comm_coeff[k] * z[k];
    std::vector<double> load, weight;
    loads_and_weights(z, load, weight);
    for (int j = 0; j < num_j; ++j) {
      if (weight[j] <= 0.0) continue;
      if (load[j] >= s * mu) return kInf;
      sum += weight[j] * (bound == DelayBound::exact ? operation_delay(s, mu, load[j])
                                                     : operation_delay_upper(s, mu, load[j]));
    }
    return sum;
  }

  /// Gradient of the computation-delay part of the exact objective; the
  /// Erlang-C slope is taken by central differences on the per-MEC load.
  std::vector<double> exact_comp_gradient(std::span<const double> z) const {
    const int s = sc->queue().computing_units;
    const double mu = sc->queue().unit_service_rate;
    std::vector<double> load, weight;
    loads_and_weights(z, load, weight);
    std::vector<double> t(num_j), tp(num_j);
    for (int j = 0; j < num_j; ++j) {
      t[j] = operation_delay(s, mu, load[j]);
      const double h = std::min(1e-6 * s * mu, 0.25 * (s * mu - load[j]));
      const double up = operation_delay(s, mu, load[j] + h);
      const double dn = operation_delay(s, mu, std::max(0.0, load[j] - h));
      tp[j] = (up - dn) / (h + std::min(h, load[j]));
    }
    std::vector<double> g(comm_coeff.size());
    for (int i = 0; i < num_i; ++i) {
      const double rate = sc->arrival_rates()[i];
      for (int j = 0; j < num_j; ++j) {
        for (int u = 0; u < num_u; ++u) {
          g[zi(i, j, u)] = t[j] + weight[j] * tp[j] * rate;
        }
      }
    }
    return g;
  }

  /// Convex upper-bound objective and gradient (used by UAO's single solve).
  double upper_value(std::span<const double> z) const { return total(z, DelayBound::upper); }

  void upper_gradient(std::span<const double> z, std::span<double> g) const {
    const int s = sc->queue().computing_units;
    const double mu = sc->queue().unit_service_rate;
    std::vector<double> load, weight;
    loads_and_weights(z, load, weight);
    std::vector<double> t(num_j), tp(num_j);
    for (int j = 0; j < num_j; ++j) {
      t[j] = operation_delay_upper(s, mu, load[j]);
      tp[j] = operation_delay_upper_derivative(s, mu, load[j]);
    }
    for (int i = 0; i < num_i; ++i) {
      const double rate = sc->arrival_rates()[i];
      for (int j = 0; j < num_j; ++j) {
        for (int u = 0; u < num_u; ++u) {
          g[zi(i, j, u)] = comm_coeff[zi(i, j, u)] + t[j] + weight[j] * tp[j] * rate;
        }
      }
    }
  }
};

/// One SCA step: linearise the computation delay at z and minimise the
/// resulting linear program over the polytope.
std::vector<double> sca_step(const AssociationContext& ctx, const BoxSimplexFeasibleSet& polytope,
                             const std::vector<double>& z, const PgOptions& opts) {
  const std::vector<double> comp_grad = ctx.exact_comp_gradient(z);
  std::vector<double> lin(ctx.comm_coeff.size());
  for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = ctx.comm_coeff[k] + comp_grad[k];

  auto value = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < lin.size(); ++k) s += lin[k] * x[k];
    return s;
  };
  auto gradient = [&](std::span<const double>, std::span<double> g) {
    std::copy(lin.begin(), lin.end(), g.begin());
  };
  return projected_gradient_min(value, gradient, polytope, z, opts).x;
}

/// SCA loop on the exact objective. Each round tries the full step to the
/// linearised solution and the damped half-step, keeping the better one;
/// stops when the objective stalls or would increase.
std::vector<double> sca_association(const AssociationContext& ctx,
                                    const BoxSimplexFeasibleSet& polytope,
                                    std::vector<double> z, const BaselineConfig& config,
                                    int max_steps, std::vector<double>* trace) {
  double f = ctx.total(z, DelayBound::exact);
  if (trace) trace->push_back(f);
  for (int k = 0; k < max_steps; ++k) {
    const std::vector<double> solution = sca_step(ctx, polytope, z, config.pg_association);
    std::vector<double> damped(z.size());
    for (std::size_t t = 0; t < z.size(); ++t) {
      damped[t] = z[t] + config.sca_damping * (solution[t] - z[t]);
    }
    const double f_full = ctx.total(solution, DelayBound::exact);
    const double f_damped = ctx.total(damped, DelayBound::exact);
    const double fn = std::min(f_full, f_damped);
    if (!(fn <= f)) break;
    z = f_full <= f_damped ? solution : std::move(damped);
    const double change = f - fn;
    f = fn;
    if (trace) trace->push_back(f);
    if (change <= config.eps) break;
  }
  return z;
}

DecisionVariables vars_with_association(DecisionVariables vars,
                                        std::vector<double> z) {
  vars.association = std::move(z);
  vars.association_slack = vars.association;
  return vars;
}

}  // namespace

// ---------------------------------------------------------------------------
// Genetic association search
// ---------------------------------------------------------------------------

namespace {

struct GaEvaluator {
  const NetworkScenario* sc;
  std::vector<double> comm_coeff;  // from communication_coefficients
  int num_i, num_j, num_u;
  double cap;

  GaEvaluator(const DelayEvaluator& eval, const DecisionVariables& vars, double margin)
      : sc(&eval.scenario()), comm_coeff(communication_coefficients(eval, vars)),
        num_i(vars.num_iots), num_j(vars.num_mecs), num_u(vars.num_subbands),
        cap(eval.scenario().queue().total_service_rate() - margin) {}

  double fitness(const Chromosome& ch) const {
    const int s = sc->queue().computing_units;
    const double mu = sc->queue().unit_service_rate;
    std::vector<double> load(num_j, 0.0);
    std::vector<bool> used(num_u, false);
    for (int i = 0; i < num_i; ++i) {
      const int j = ch[i] / num_u;
      const int u = ch[i] % num_u;
      if (used[u]) return kInf;
      used[u] = true;
      load[j] += sc->arrival_rates()[i];
    }
    for (int j = 0; j < num_j; ++j) {
      if (load[j] > cap) return kInf;
    }
    double total = 0.0;
    for (int i = 0; i < num_i; ++i) {
      const int j = ch[i] / num_u;
      const int u = ch[i] % num_u;
      total += comm_coeff[(i * num_j + j) * num_u + u] + operation_delay(s, mu, load[j]);
    }
    return total / num_i;
  }
};

void repair_duplicate_subbands(Chromosome& ch, int num_u) {
  std::vector<bool> used(num_u, false);
  std::vector<int> fix;
  for (int i = 0; i < static_cast<int>(ch.size()); ++i) {
    const int u = ch[i] % num_u;
    if (used[u]) {
      fix.push_back(i);
    } else {
      used[u] = true;
    }
  }
  int next_free = 0;
  for (int i : fix) {
    while (next_free < num_u && used[next_free]) ++next_free;
    require(next_free < num_u, ErrorCode::internal, "GA repair ran out of sub-bands");
    ch[i] = (ch[i] / num_u) * num_u + next_free;
    used[next_free] = true;
  }
}

}  // namespace

GaResult genetic_association_search(const DelayEvaluator& eval, const DecisionVariables& vars,
                                    const GaConfig& config, Rng& rng,
                                    const std::vector<Chromosome>& seeded) {
  require(config.population >= 2, ErrorCode::invalid_argument, "GA: population must be >= 2");
  require(config.elitism >= 0 && config.elitism < config.population,
          ErrorCode::invalid_argument, "GA: elitism must be < population");
  const int num_i = vars.num_iots;
  const int num_j = vars.num_mecs;
  const int num_u = vars.num_subbands;
  const double mutation =
      config.mutation_rate < 0.0 ? 1.0 / std::max(1, num_i) : config.mutation_rate;

  GaEvaluator ga(eval, vars, kStabilityMargin);

  std::vector<Chromosome> population;
  population.reserve(config.population);
  for (const auto& ch : seeded) {
    require(static_cast<int>(ch.size()) == num_i, ErrorCode::invalid_argument,
            "GA: seeded chromosome has the wrong length");
    if (static_cast<int>(population.size()) < config.population) population.push_back(ch);
  }
  while (static_cast<int>(population.size()) < config.population) {
    // Random sub-band permutation guarantees a duplicate-free start.
    std::vector<int> perm(num_u);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = num_u - 1; k > 0; --k) {
      std::swap(perm[k], perm[rng.next_index(k + 1)]);
    }
    Chromosome ch(num_i);
    for (int i = 0; i < num_i; ++i) {
      ch[i] = static_cast<int>(rng.next_index(num_j)) * num_u + perm[i];
    }
    population.push_back(std::move(ch));
  }

  std::vector<double> fitness(config.population);
  auto evaluate_all = [&] {
    for (int p = 0; p < config.population; ++p) fitness[p] = ga.fitness(population[p]);
  };
  auto ranking = [&] {
    std::vector<int> order(config.population);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (fitness[a] != fitness[b]) return fitness[a] < fitness[b];
      return population[a] < population[b];
    });
    return order;
  };

  evaluate_all();
  GaResult result;
  {
    const auto order = ranking();
    result.best = population[order[0]];
    result.best_fitness = fitness[order[0]];
    result.best_trace.push_back(result.best_fitness);
  }

  for (int gen = 0; gen < config.generations; ++gen) {
    const auto order = ranking();
    std::vector<Chromosome> next;
    next.reserve(config.population);
    for (int e = 0; e < config.elitism; ++e) next.push_back(population[order[e]]);

    auto tournament = [&]() -> const Chromosome& {
      int best = static_cast<int>(rng.next_index(config.population));
      for (int t = 1; t < config.tournament; ++t) {
        const int c = static_cast<int>(rng.next_index(config.population));
        if (fitness[c] < fitness[best]) best = c;
      }
      return population[best];
    };

    while (static_cast<int>(next.size()) < config.population) {
      Chromosome a = tournament();
      Chromosome b = tournament();
      if (num_i > 1 && rng.bernoulli(config.crossover_rate)) {
        const int cut = 1 + static_cast<int>(rng.next_index(num_i - 1));
        for (int i = cut; i < num_i; ++i) std::swap(a[i], b[i]);
      }
      for (Chromosome* ch : {&a, &b}) {
        for (int i = 0; i < num_i; ++i) {
          if (rng.bernoulli(mutation)) {
            (*ch)[i] = static_cast<int>(rng.next_index(num_j)) * num_u +
                       static_cast<int>(rng.next_index(num_u));
          }
        }
        repair_duplicate_subbands(*ch, num_u);
        if (static_cast<int>(next.size()) < config.population) next.push_back(*ch);
      }
    }
    population = std::move(next);
    evaluate_all();
    const auto new_order = ranking();
    if (fitness[new_order[0]] < result.best_fitness) {
      result.best = population[new_order[0]];
      result.best_fitness = fitness[new_order[0]];
    }
    result.best_trace.push_back(result.best_fitness);
  }
  return result;
}

// ---------------------------------------------------------------------------
// UO: optimise relays, powers and placement; nearest-stable association
// ---------------------------------------------------------------------------

RunReport run_uo(const NetworkScenario& sc, const BaselineConfig& config, uint64_t seed) {
  const auto t0 = Clock::now();
  RunReport report;
  report.algorithm = "uo";
  report.seed = seed;

  DelayEvaluator eval(sc);
  DecisionVariables vars = initialize_variables(sc, seed, config.stability_margin);
  eval.refresh_uav_gains(vars);

  double f = exact_mean_delay(eval, vars);
  report.objective_trace.push_back(f);
  if (sc.num_uavs() > 0) {
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      report.inner_iterations++;
      DecisionVariables saved = vars;
      apply_relay_rule(vars, compute_relay_pricing(eval, vars));
      solve_power_closed_form(eval, vars);
      PgOptions pos = config.pg_position;
      pos.initial_step = std::max(1.0, sc.area_side());
      solve_positions_pg(eval, vars, pos);
      const double fn = exact_mean_delay(eval, vars);
      if (!(fn <= f)) {
        vars = std::move(saved);
        eval.refresh_uav_gains(vars);
        break;
      }
      const double change = f - fn;
      f = fn;
      report.objective_trace.push_back(f);
      if (change <= config.eps) break;
    }
  }
  report.converged = true;
  report.termination_reason = "objective_stall";

  const DecisionVariables relaxed = vars;
  vars.relay_slack = vars.relay_select;
  finalize_solution(eval, vars);
  fill_summaries(report, sc, relaxed, vars);
  report.wall_time_s = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// UAO: heuristic relays and equal power; optimise the association only
// ---------------------------------------------------------------------------

RunReport run_uao(const NetworkScenario& sc, const BaselineConfig& config, uint64_t seed) {
  const auto t0 = Clock::now();
  RunReport report;
  report.algorithm = "uao";
  report.seed = seed;

  DelayEvaluator eval(sc);
  DecisionVariables vars = initialize_variables(sc, seed, config.stability_margin);

  // Relay heuristic: nearest UAV, used only when the nearest MEC is farther.
  std::fill(vars.relay_select.begin(), vars.relay_select.end(), 0.0);
  for (int i = 0; i < vars.num_iots; ++i) {
    double d_mec = kInf;
    for (int j = 0; j < vars.num_mecs; ++j) {
      d_mec = std::min(d_mec, distance(sc.iot_positions()[i], sc.mec_positions()[j]));
    }
    int best_m = -1;
    double d_uav = kInf;
    for (int m = 0; m < vars.num_uavs; ++m) {
      const double d = distance(sc.iot_positions()[i], vars.uav_positions[m]);
      if (d < d_uav) {
        d_uav = d;
        best_m = m;
      }
    }
    if (best_m >= 0 && d_mec > d_uav) vars.relay_select[vars.am(i, best_m)] = 1.0;
  }
  vars.relay_slack = vars.relay_select;

  // Equal power split across the IoTs served by each UAV.
  std::fill(vars.uav_power.begin(), vars.uav_power.end(), 0.0);
  for (int m = 0; m < vars.num_uavs; ++m) {
    int served = 0;
    for (int i = 0; i < vars.num_iots; ++i) {
      if (vars.relay_select[vars.am(i, m)] > 0.0) ++served;
    }
    if (served == 0) continue;
    const double share = sc.uav_tx_power_budget() / served;
    for (int i = 0; i < vars.num_iots; ++i) {
      if (vars.relay_select[vars.am(i, m)] > 0.0) vars.uav_power[vars.am(i, m)] = share;
    }
  }
  eval.refresh_uav_gains(vars);

  // Single convex solve of the upper-bounded association problem.
  AssociationContext ctx(eval, vars);
  const auto polytope = association_polytope(sc, config.stability_margin);
  PgOptions opts = config.pg_association;
  auto result = projected_gradient_min(
      [&](std::span<const double> z) { return ctx.upper_value(z); },
      [&](std::span<const double> z, std::span<double> g) { ctx.upper_gradient(z, g); },
      polytope, vars.association, opts);
  report.inner_iterations = result.iterations;
  report.objective_trace.push_back(result.objective);

  DecisionVariables relaxed = vars_with_association(vars, std::move(result.x));
  DecisionVariables rounded = relaxed;
  report.rounding_repaired = round_association(eval, rounded, config.stability_margin);
  // Powers and positions stay at the heuristic point by design.
  report.converged = true;
  report.termination_reason = "convex_solve";
  fill_summaries(report, sc, relaxed, rounded);
  report.wall_time_s = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// NR-SCA: direct paths only, SCA on the association
// ---------------------------------------------------------------------------

RunReport run_nr_sca(const NetworkScenario& sc, const BaselineConfig& config, uint64_t seed) {
  const auto t0 = Clock::now();
  RunReport report;
  report.algorithm = "nr-sca";
  report.seed = seed;

  DelayEvaluator eval(sc);
  DecisionVariables vars = initialize_variables(sc, seed, config.stability_margin);
  std::fill(vars.relay_select.begin(), vars.relay_select.end(), 0.0);
  std::fill(vars.relay_slack.begin(), vars.relay_slack.end(), 0.0);
  std::fill(vars.uav_power.begin(), vars.uav_power.end(), 0.0);
  eval.refresh_uav_gains(vars);

  AssociationContext ctx(eval, vars);
  const auto polytope = association_polytope(sc, config.stability_margin);
  std::vector<double> z = sca_association(ctx, polytope, vars.association, config,
                                          config.max_sweeps, &report.objective_trace);
  report.inner_iterations = static_cast<int>(report.objective_trace.size());

  DecisionVariables relaxed = vars_with_association(vars, std::move(z));
  DecisionVariables rounded = relaxed;
  report.rounding_repaired = round_association(eval, rounded, config.stability_margin);
  report.converged = true;
  report.termination_reason = "sca_stall";
  fill_summaries(report, sc, relaxed, rounded);
  report.wall_time_s = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// UO-GUAO: UAV optimisation alternated with a genetic association search
// ---------------------------------------------------------------------------

namespace {

Chromosome chromosome_from_vars(const DecisionVariables& vars) {
  Chromosome ch(vars.num_iots, 0);
  for (int i = 0; i < vars.num_iots; ++i) {
    double top = -1.0;
    for (int j = 0; j < vars.num_mecs; ++j) {
      for (int u = 0; u < vars.num_subbands; ++u) {
        const double z = vars.association[vars.zi(i, j, u)];
        if (z > top) {
          top = z;
          ch[i] = j * vars.num_subbands + u;
        }
      }
    }
  }
  return ch;
}

void apply_chromosome(DecisionVariables& vars, const Chromosome& ch) {
  std::fill(vars.association.begin(), vars.association.end(), 0.0);
  for (int i = 0; i < vars.num_iots; ++i) {
    const int j = ch[i] / vars.num_subbands;
    const int u = ch[i] % vars.num_subbands;
    vars.association[vars.zi(i, j, u)] = 1.0;
  }
  vars.association_slack = vars.association;
}

void uav_block_sweeps(const NetworkScenario& sc, DelayEvaluator& eval, DecisionVariables& vars,
                      const BaselineConfig& config, int max_sweeps) {
  if (sc.num_uavs() == 0) return;
  double f = exact_mean_delay(eval, vars);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    DecisionVariables saved = vars;
    apply_relay_rule(vars, compute_relay_pricing(eval, vars));
    solve_power_closed_form(eval, vars);
    PgOptions pos = config.pg_position;
    pos.initial_step = std::max(1.0, sc.area_side());
    solve_positions_pg(eval, vars, pos);
    const double fn = exact_mean_delay(eval, vars);
    if (!(fn <= f)) {
      vars = std::move(saved);
      eval.refresh_uav_gains(vars);
      break;
    }
    const double change = f - fn;
    f = fn;
    if (change <= config.eps) break;
  }
  vars.relay_slack = vars.relay_select;
}

}  // namespace

RunReport run_uo_guao(const NetworkScenario& sc, const BaselineConfig& config,
                      const GaConfig& ga, uint64_t seed) {
  const auto t0 = Clock::now();
  RunReport report;
  report.algorithm = "uo-guao";
  report.seed = seed;

  DelayEvaluator eval(sc);
  DecisionVariables vars = initialize_variables(sc, seed, config.stability_margin);
  eval.refresh_uav_gains(vars);
  Rng rng(seed);

  double f = exact_mean_delay(eval, vars);
  report.objective_trace.push_back(f);
  for (int round = 0; round < 5; ++round) {
    uav_block_sweeps(sc, eval, vars, config, 10);

    const GaResult result =
        genetic_association_search(eval, vars, ga, rng, {chromosome_from_vars(vars)});
    if (std::isfinite(result.best_fitness)) {
      apply_chromosome(vars, result.best);
    }
    const double fn = exact_mean_delay(eval, vars);
    report.inner_iterations++;
    report.objective_trace.push_back(fn);
    const double change = f - fn;
    f = fn;
    if (change <= config.eps) break;
  }

  const DecisionVariables relaxed = vars;
  finalize_solution(eval, vars);
  report.converged = true;
  report.termination_reason = "alternation_stall";
  fill_summaries(report, sc, relaxed, vars);
  report.wall_time_s = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// BCD-SCA: single-loop block sweeps, no duals or penalties
// ---------------------------------------------------------------------------

RunReport run_bcd_sca(const NetworkScenario& sc, const BaselineConfig& config, uint64_t seed) {
  const auto t0 = Clock::now();
  RunReport report;
  report.algorithm = "bcd-sca";
  report.seed = seed;

  DelayEvaluator eval(sc);
  DecisionVariables vars = initialize_variables(sc, seed, config.stability_margin);
  eval.refresh_uav_gains(vars);
  const auto polytope = association_polytope(sc, config.stability_margin);

  double f = exact_mean_delay(eval, vars);
  report.objective_trace.push_back(f);
  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    report.inner_iterations++;
    DecisionVariables saved = vars;

    if (sc.num_uavs() > 0) {
      apply_relay_rule(vars, compute_relay_pricing(eval, vars));
      vars.relay_slack = vars.relay_select;
      solve_power_closed_form(eval, vars);
      PgOptions pos = config.pg_position;
      pos.initial_step = std::max(1.0, sc.area_side());
      solve_positions_pg(eval, vars, pos);
    }

    // Association block: SCA from the current binary point, then snap back
    // to binary so the closed-form power step stays applicable.
    AssociationContext ctx(eval, vars);
    std::vector<double> z = sca_association(ctx, polytope, vars.association, config,
                                            config.sca_steps_per_sweep, nullptr);
    DecisionVariables candidate = vars_with_association(vars, std::move(z));
    round_association(eval, candidate, config.stability_margin);
    const double f_candidate = exact_mean_delay(eval, candidate);
    if (f_candidate <= exact_mean_delay(eval, vars)) {
      vars = std::move(candidate);
    }

    const double fn = exact_mean_delay(eval, vars);
    if (!(fn <= f)) {
      vars = std::move(saved);
      eval.refresh_uav_gains(vars);
      break;
    }
    const double change = f - fn;
    f = fn;
    report.objective_trace.push_back(f);
    if (change <= config.eps) break;
  }

  const DecisionVariables relaxed = vars;
  finalize_solution(eval, vars);
  report.converged = true;
  report.termination_reason = "objective_stall";
  fill_summaries(report, sc, relaxed, vars);
  report.wall_time_s = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// Quantized exhaustive search
// ---------------------------------------------------------------------------

namespace {

struct EnumBest {
  double mean_delay = kInf;
  long long ordinal = -1;
  DecisionVariables vars;
};

}  // namespace

RunReport run_exhaustive(const NetworkScenario& sc, const QuantizationGrid& grid,
                         const BaselineConfig& config) {
  const auto t0 = Clock::now();
  require(grid.n_q1 >= 2 && grid.n_q2 >= 2, ErrorCode::invalid_argument,
          "exhaustive: quantization levels must be >= 2");
  const int num_i = sc.num_iots();
  const int num_j = sc.num_mecs();
  const int num_u = sc.num_subbands();
  const int num_m = sc.num_uavs();

  // Grid-point count before any stability filtering; refusal keys off it.
  double log10_count = 2.0 * num_m * std::log10(static_cast<double>(grid.n_q2));
  for (int t = 0; t < num_i; ++t) log10_count += std::log10(static_cast<double>(num_u - t));
  log10_count += num_i * std::log10(static_cast<double>(num_j));
  log10_count += num_i * std::log10(1.0 + static_cast<double>(num_m) * grid.n_q1);
  if (log10_count > std::log10(grid.enum_cap)) {
    std::ostringstream msg;
    msg << "exhaustive search refused: about 1e+" << static_cast<long long>(log10_count)
        << " quantized candidate points exceed the cap " << grid.enum_cap;
    fail(ErrorCode::refused, msg.str());
  }

  DelayEvaluator eval(sc);
  const double area = sc.area_side();
  const double delta_q = area / (grid.n_q2 - 1);
  const double delta_p = sc.uav_tx_power_budget() / (grid.n_q1 - 1);
  const int q_points = grid.n_q2 * grid.n_q2;

  // Distances from every grid point to every IoT and MEC.
  const double h2 = sc.uav_altitude() * sc.uav_altitude();
  std::vector<double> dist_qi(static_cast<std::size_t>(q_points) * num_i);
  std::vector<double> dist_qj(static_cast<std::size_t>(q_points) * num_j);
  for (int g = 0; g < q_points; ++g) {
    const double qx = (g % grid.n_q2) * delta_q;
    const double qy = (g / grid.n_q2) * delta_q;
    for (int i = 0; i < num_i; ++i) {
      const double dx = qx - sc.iot_positions()[i].x;
      const double dy = qy - sc.iot_positions()[i].y;
      dist_qi[g * num_i + i] = std::sqrt(dx * dx + dy * dy + h2);
    }
    for (int j = 0; j < num_j; ++j) {
      const double dx = qx - sc.mec_positions()[j].x;
      const double dy = qy - sc.mec_positions()[j].y;
      dist_qj[g * num_j + j] = std::sqrt(dx * dx + dy * dy + h2);
    }
  }

  const auto& budget = eval.link_budget();
  const double d_in = sc.task_input_bits();
  const double bw = sc.subband_bandwidth();
  const double cap = sc.queue().total_service_rate() - config.stability_margin;
  const int s = sc.queue().computing_units;
  const double mu = sc.queue().unit_service_rate;

  EnumBest best;
  long long ordinal = 0;

  std::vector<int> pick_j(num_i), pick_u(num_i);
  std::vector<bool> used_u(num_u, false);
  std::vector<double> load(num_j, 0.0);
  std::vector<int> relay(num_i, -1);

  DecisionVariables work = DecisionVariables::make(sc);

  // Evaluates every relay profile for the current association.
  auto evaluate_alpha_profiles = [&](auto&& self, int i) -> void {
    if (i == num_i) {
      ++ordinal;
      // Direct part and computation part are fixed by (alpha, z).
      double base = 0.0;
      for (int k = 0; k < num_i; ++k) {
        base += operation_delay(s, mu, load[pick_j[k]]);
        if (relay[k] < 0) base += eval.direct_delay(k, pick_j[k], pick_u[k]);
      }
      // Per-UAV grid optimisation of position and power split.
      double relay_total = 0.0;
      for (int m = 0; m < num_m && relay_total < kInf; ++m) {
        std::vector<int> served;
        for (int k = 0; k < num_i; ++k) {
          if (relay[k] == m) served.push_back(k);
        }
        if (served.empty()) continue;
        double best_m = kInf;
        const int levels = grid.n_q1 - 1;  // level 0 is useless for a served pair
        std::vector<int> level(served.size(), 1);
        for (int g = 0; g < q_points; ++g) {
          std::vector<double> t1(served.size()), gamma(served.size());
          for (std::size_t t = 0; t < served.size(); ++t) {
            const int k = served[t];
            const double d1 = dist_qi[g * num_i + k];
            const double snr1 = budget.snr(d1, sc.iot_tx_power(), pick_u[k]);
            t1[t] = d_in * M_LN2 / (bw * std::log1p(snr1));
            gamma[t] =
                budget.gain(dist_qj[g * num_j + pick_j[k]], pick_u[k]) / budget.noise_power;
          }
          // Enumerate power levels (each served pair gets at least one step).
          auto power_rec = [&](auto&& rec, std::size_t t, int budget_left,
                               double partial) -> void {
            if (partial >= best_m) return;
            if (t == served.size()) {
              best_m = partial;
              return;
            }
            const int remaining = static_cast<int>(served.size() - t - 1);
            for (int lv = 1; lv + remaining <= budget_left; ++lv) {
              const double p = lv * delta_p;
              const double t2 = d_in * M_LN2 / (bw * std::log1p(gamma[t] * p));
              rec(rec, t + 1, budget_left - lv, partial + t1[t] + t2);
            }
          };
          power_rec(power_rec, 0, levels, 0.0);
        }
        if (best_m >= kInf) {
          relay_total = kInf;
        } else {
          relay_total += best_m;
        }
      }

      double mean = kInf;
      if (relay_total < kInf) mean = (base + relay_total) / num_i;

      // Continuous refinement through the shared finaliser; the oracle keeps
      // whichever is better so heuristics can never beat it.
      std::fill(work.relay_select.begin(), work.relay_select.end(), 0.0);
      std::fill(work.association.begin(), work.association.end(), 0.0);
      for (int k = 0; k < num_i; ++k) {
        if (relay[k] >= 0) work.relay_select[work.am(k, relay[k])] = 1.0;
        work.association[work.zi(k, pick_j[k], pick_u[k])] = 1.0;
      }
      work.relay_slack = work.relay_select;
      work.association_slack = work.association;
      finalize_solution(eval, work);
      const double mean_fin = exact_mean_delay(eval, work);

      if (std::min(mean, mean_fin) < best.mean_delay) {
        best.ordinal = ordinal;
        if (mean_fin <= mean) {
          best.mean_delay = mean_fin;
          best.vars = work;
        } else {
          best.mean_delay = mean;
          best.vars = work;
          // Reconstruct the winning grid point for the report.
          for (int m = 0; m < num_m; ++m) {
            std::vector<int> served;
            for (int k = 0; k < num_i; ++k) {
              if (relay[k] == m) served.push_back(k);
            }
            if (served.empty()) continue;
            double best_val = kInf;
            int best_g = 0;
            std::vector<int> best_lv(served.size(), 1);
            const int levels = grid.n_q1 - 1;
            for (int g = 0; g < q_points; ++g) {
              std::vector<double> t1(served.size()), gamma(served.size());
              for (std::size_t t = 0; t < served.size(); ++t) {
                const int k = served[t];
                const double snr1 =
                    budget.snr(dist_qi[g * num_i + k], sc.iot_tx_power(), pick_u[k]);
                t1[t] = d_in * M_LN2 / (bw * std::log1p(snr1));
                gamma[t] = budget.gain(dist_qj[g * num_j + pick_j[k]], pick_u[k]) /
                           budget.noise_power;
              }
              std::vector<int> lv(served.size(), 1);
              auto rec = [&](auto&& rec2, std::size_t t, int left, double partial) -> void {
                if (partial >= best_val) return;
                if (t == served.size()) {
                  best_val = partial;
                  best_g = g;
                  best_lv = lv;
                  return;
                }
                const int remaining = static_cast<int>(served.size() - t - 1);
                for (int l = 1; l + remaining <= left; ++l) {
                  lv[t] = l;
                  const double p = l * delta_p;
                  const double t2 = d_in * M_LN2 / (bw * std::log1p(gamma[t] * p));
                  rec2(rec2, t + 1, left - l, partial + t1[t] + t2);
                }
              };
              rec(rec, 0, levels, 0.0);
            }
            best.vars.uav_positions[m] = {(best_g % grid.n_q2) * delta_q,
                                          (best_g / grid.n_q2) * delta_q, sc.uav_altitude()};
            for (std::size_t t = 0; t < served.size(); ++t) {
              best.vars.uav_power[best.vars.am(served[t], m)] = best_lv[t] * delta_p;
            }
          }
        }
      }
      return;
    }
    relay[i] = -1;
    self(self, i + 1);
    for (int m = 0; m < num_m; ++m) {
      relay[i] = m;
      self(self, i + 1);
    }
    relay[i] = -1;
  };

  // Depth-first enumeration of stable binary associations.
  auto enumerate_z = [&](auto&& self, int i) -> void {
    if (i == num_i) {
      evaluate_alpha_profiles(evaluate_alpha_profiles, 0);
      return;
    }
    for (int j = 0; j < num_j; ++j) {
      if (load[j] + sc.arrival_rates()[i] > cap) continue;
      for (int u = 0; u < num_u; ++u) {
        if (used_u[u]) continue;
        pick_j[i] = j;
        pick_u[i] = u;
        used_u[u] = true;
        load[j] += sc.arrival_rates()[i];
        self(self, i + 1);
        used_u[u] = false;
        load[j] -= sc.arrival_rates()[i];
      }
    }
  };
  enumerate_z(enumerate_z, 0);

  require(best.ordinal >= 0, ErrorCode::infeasible,
          "exhaustive: no stable binary association exists");

  RunReport report;
  report.algorithm = "exhaustive";
  report.seed = 0;
  report.converged = true;
  report.termination_reason = "enumeration_complete";
  report.inner_iterations = static_cast<int>(std::min<long long>(ordinal, 1'000'000'000));
  DelayEvaluator eval_out(sc);
  eval_out.refresh_uav_gains(best.vars);
  fill_summaries(report, sc, best.vars, best.vars);
  report.wall_time_s = seconds_since(t0);
  return report;
}

}  // namespace thzmec

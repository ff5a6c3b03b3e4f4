#include "thzmec/solver_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thzmec/error.hpp"
#include "thzmec/queueing.hpp"
#include "thzmec/scenario.hpp"

namespace thzmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The (j, u) entry that best represents IoT i's routing: its dominant
// association entry, or the best direct slot when the row is empty. Used to
// price decisions for rows whose association has transiently collapsed.
struct RowAnchor {
  int j = 0;
  int u = 0;
  double mass = 0.0;
};

RowAnchor association_anchor(const DelayEvaluator& eval, const DecisionVariables& vars, int i) {
  RowAnchor a;
  double top = 0.0;
  for (int j = 0; j < vars.num_mecs; ++j) {
    for (int u = 0; u < vars.num_subbands; ++u) {
      const double z = vars.association[vars.zi(i, j, u)];
      a.mass += z;
      if (z > top) {
        top = z;
        a.j = j;
        a.u = u;
      }
    }
  }
  if (top == 0.0) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < vars.num_mecs; ++j) {
      for (int u = 0; u < vars.num_subbands; ++u) {
        const double t = eval.direct_delay(i, j, u);
        if (t < best) {
          best = t;
          a.j = j;
          a.u = u;
        }
      }
    }
  }
  return a;
}

}  // namespace

RelayPricing compute_relay_pricing(const DelayEvaluator& eval, const DecisionVariables& vars) {
  const auto& sc = eval.scenario();
  const int num_i = vars.num_iots;
  const int num_j = vars.num_mecs;
  const int num_u = vars.num_subbands;
  const int num_m = vars.num_uavs;
  const double budget = sc.uav_tx_power_budget();

  std::vector<int> served(num_m, 0);
  for (int m = 0; m < num_m; ++m) {
    for (int i = 0; i < num_i; ++i) {
      if (vars.relay_select[vars.am(i, m)] > 0.0) served[m]++;
    }
  }

  RelayPricing out;
  out.t_direct.assign(num_i, 0.0);
  out.t_relay.assign(static_cast<std::size_t>(num_i) * std::max(num_m, 1), 0.0);
  for (int i = 0; i < num_i; ++i) {
    // Rows whose association has collapsed carry no price signal; complete
    // them up to the dormancy weight at the anchor entry so the relay
    // decision still compares real delays.
    const RowAnchor anchor = association_anchor(eval, vars, i);
    const double boost = std::max(0.0, kDormantRouteWeight - anchor.mass);
    double direct = boost * eval.direct_delay(i, anchor.j, anchor.u);
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        const double zv = vars.association[vars.zi(i, j, u)];
        if (zv > 0.0) direct += zv * eval.direct_delay(i, j, u);
      }
    }
    out.t_direct[i] = std::min(direct, kDelayPriceCeiling);
    for (int m = 0; m < num_m; ++m) {
      double p = vars.uav_power[vars.am(i, m)];
      if (p <= 0.0) p = budget / (served[m] + 1);
      double relay = boost * (eval.relay_hop1(i, m, anchor.u) +
                              eval.relay_hop2(m, anchor.j, anchor.u, p));
      for (int j = 0; j < num_j; ++j) {
        for (int u = 0; u < num_u; ++u) {
          const double zv = vars.association[vars.zi(i, j, u)];
          if (zv > 0.0) {
            relay += zv * (eval.relay_hop1(i, m, u) + eval.relay_hop2(m, j, u, p));
          }
        }
      }
      out.t_relay[i * num_m + m] = std::min(relay, kDelayPriceCeiling);
    }
  }
  return out;
}

void apply_relay_rule(DecisionVariables& vars, const RelayPricing& pricing) {
  for (int i = 0; i < vars.num_iots; ++i) {
    int best = -1;
    double best_t = kInf;
    for (int m = 0; m < vars.num_uavs; ++m) {
      const double t = pricing.t_relay[i * vars.num_uavs + m];
      if (t < best_t) {
        best_t = t;
        best = m;
      }
    }
    for (int m = 0; m < vars.num_uavs; ++m) vars.relay_select[vars.am(i, m)] = 0.0;
    if (best >= 0 && pricing.t_direct[i] > best_t) {
      vars.relay_select[vars.am(i, best)] = 1.0;
    }
  }
}

void update_relay_slack(DecisionVariables& vars, const DualState& duals) {
  for (std::size_t k = 0; k < vars.relay_select.size(); ++k) {
    const double a = vars.relay_select[k];
    vars.relay_slack[k] = (a * a + (1.0 - duals.rho_alpha * duals.eta_alpha1[k]) * a +
                           duals.rho_alpha * duals.eta_alpha2[k]) /
                          (a * a + 1.0);
  }
}

void update_association_slack(DecisionVariables& vars, const DualState& duals) {
  for (std::size_t k = 0; k < vars.association.size(); ++k) {
    const double z = vars.association[k];
    vars.association_slack[k] = (z * z + (1.0 - duals.rho_z * duals.eta_z1[k]) * z +
                                 duals.rho_z * duals.eta_z2[k]) /
                                (z * z + 1.0);
  }
}

bool association_near_binary(const DecisionVariables& vars, double tol) {
  for (int i = 0; i < vars.num_iots; ++i) {
    double mass = 0.0;
    double top = 0.0;
    for (int j = 0; j < vars.num_mecs; ++j) {
      for (int u = 0; u < vars.num_subbands; ++u) {
        const double z = vars.association[vars.zi(i, j, u)];
        mass += z;
        top = std::max(top, z);
      }
    }
    if (std::abs(mass - 1.0) > tol || mass - top > tol) return false;
  }
  return true;
}

std::vector<double> communication_coefficients(const DelayEvaluator& eval,
                                               const DecisionVariables& vars) {
  const int num_i = vars.num_iots;
  const int num_j = vars.num_mecs;
  const int num_u = vars.num_subbands;
  std::vector<double> coeff(static_cast<std::size_t>(num_i) * num_j * num_u);
  for (int i = 0; i < num_i; ++i) {
    const double alpha_i = vars.alpha_row_sum(i);
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        double c = (1.0 - alpha_i) * eval.direct_delay(i, j, u);
        for (int m = 0; m < vars.num_uavs; ++m) {
          const double a = vars.relay_select[vars.am(i, m)];
          if (a > 0.0) {
            c += a * (eval.relay_hop1(i, m, u) +
                      eval.relay_hop2(m, j, u, vars.uav_power[vars.am(i, m)]));
          }
        }
        coeff[vars.zi(i, j, u)] = std::min(c, kDelayPriceCeiling);
      }
    }
  }
  return coeff;
}

namespace {

struct PowerTerm {
  int iot = 0;
  double gamma = 0.0;  // |h|^2 / (B N0) of the routed second hop
  double l = 0.0;      // Theorem-style pricing coefficient
};

double closed_form_power(const PowerTerm& term, double price) {
  if (term.l <= 0.0) return 0.0;
  const double w = lambert_w0(0.5 * std::sqrt(term.l / price));
  return std::expm1(2.0 * w) / term.gamma;
}

}  // namespace

void solve_power_closed_form(const DelayEvaluator& eval, DecisionVariables& vars) {
  const auto& sc = eval.scenario();
  const double budget = sc.uav_tx_power_budget();
  const double lcoef = sc.task_input_bits() * M_LN2 / sc.subband_bandwidth();

  for (int m = 0; m < vars.num_uavs; ++m) {
    std::vector<PowerTerm> terms;
    for (int i = 0; i < vars.num_iots; ++i) {
      const double a = vars.relay_select[vars.am(i, m)];
      if (a <= 0.0) {
        vars.uav_power[vars.am(i, m)] = 0.0;
        continue;
      }
      // Routed (j, u): the dominant association entry; weight is the row mass.
      const RowAnchor anchor = association_anchor(eval, vars, i);
      PowerTerm t;
      t.iot = i;
      t.gamma = eval.hop2_gamma(m, anchor.j, anchor.u);
      // Floor the routing weight: a transiently unrouted relay pair must
      // keep some power, or the association block sees a ceiling price on
      // that row and can never route it back.
      t.l = lcoef * a * t.gamma * std::max(anchor.mass, kDormantRouteWeight);
      terms.push_back(t);
    }
    if (terms.empty()) continue;

    double total_l = 0.0;
    for (const auto& t : terms) total_l += t.l;
    if (total_l <= 0.0) {
      for (const auto& t : terms) vars.uav_power[vars.am(t.iot, m)] = 0.0;
      continue;
    }

    auto total_power = [&](double price) {
      double sum = 0.0;
      for (const auto& t : terms) sum += closed_form_power(t, price);
      return sum;
    };

    double lo = 1.0, hi = 1.0;
    while (total_power(lo) < budget && lo > 1e-280) lo /= 16.0;
    while (total_power(hi) > budget && hi < 1e280) hi *= 16.0;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (total_power(mid) > budget) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double price = 0.5 * (lo + hi);
    double sum = 0.0;
    for (const auto& t : terms) {
      const double p = closed_form_power(t, price);
      vars.uav_power[vars.am(t.iot, m)] = p;
      sum += p;
    }
    if (sum > 0.0) {
      const double scale = budget / sum;
      for (const auto& t : terms) vars.uav_power[vars.am(t.iot, m)] *= scale;
    }
  }
}

namespace {

/// SP2 fallback objective: sum of relay second-hop delays, weighted by the
/// relay choice and the (possibly fractional) association.
struct PowerObjective {
  const DelayEvaluator* eval;
  const DecisionVariables* vars;
  double d_in;
  double bandwidth;

  struct Term {
    int index;      // (i, m) flat index into the power vector
    int m, j, u;
    double weight;  // alpha_{i,m} * z_{j,i}^u
  };
  std::vector<Term> terms;

  explicit PowerObjective(const DelayEvaluator& e, const DecisionVariables& v)
      : eval(&e), vars(&v), d_in(e.scenario().task_input_bits()),
        bandwidth(e.scenario().subband_bandwidth()) {
    for (int i = 0; i < v.num_iots; ++i) {
      const RowAnchor anchor = association_anchor(e, v, i);
      for (int m = 0; m < v.num_uavs; ++m) {
        const double a = v.relay_select[v.am(i, m)];
        if (a <= 0.0) continue;
        for (int j = 0; j < v.num_mecs; ++j) {
          for (int u = 0; u < v.num_subbands; ++u) {
            const double z = v.association[v.zi(i, j, u)];
            if (z > 0.0) {
              terms.push_back({v.am(i, m), m, j, u, a * z});
            }
          }
        }
        // Same dormancy floor as the closed form, anchored per row.
        if (anchor.mass < kDormantRouteWeight) {
          terms.push_back(
              {v.am(i, m), m, anchor.j, anchor.u, a * (kDormantRouteWeight - anchor.mass)});
        }
      }
    }
  }

  double value(std::span<const double> p) const {
    double total = 0.0;
    for (const auto& t : terms) {
      const double pw = p[t.index];
      if (pw <= 0.0) return kInf;
      const double snr = pw * eval->hop2_gamma(t.m, t.j, t.u);
      total += t.weight * d_in * M_LN2 / (bandwidth * std::log1p(snr));
    }
    return total;
  }

  void gradient(std::span<const double> p, std::span<double> g) const {
    std::fill(g.begin(), g.end(), 0.0);
    for (const auto& t : terms) {
      const double pw = p[t.index];
      const double gamma = eval->hop2_gamma(t.m, t.j, t.u);
      const double lg = std::log1p(pw * gamma);
      g[t.index] -= t.weight * d_in * M_LN2 * gamma /
                    (bandwidth * (1.0 + pw * gamma) * lg * lg);
    }
  }
};

}  // namespace

void solve_power_pg(const DelayEvaluator& eval, DecisionVariables& vars, const PgOptions& opts) {
  if (vars.num_uavs == 0) return;
  const double budget = eval.scenario().uav_tx_power_budget();
  PowerObjective obj(eval, vars);

  // Start: keep current powers on active pairs, floor newly activated pairs,
  // drop inactive pairs, then rescale rows onto the budget.
  std::vector<double> x = vars.uav_power;
  std::vector<bool> active(x.size(), false);
  for (int i = 0; i < vars.num_iots; ++i) {
    for (int m = 0; m < vars.num_uavs; ++m) {
      if (vars.relay_select[vars.am(i, m)] > 0.0) active[vars.am(i, m)] = true;
    }
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!active[k]) x[k] = 0.0;
  }
  for (int m = 0; m < vars.num_uavs; ++m) {
    double row = 0.0;
    int count = 0;
    for (int i = 0; i < vars.num_iots; ++i) {
      if (active[vars.am(i, m)]) ++count;
    }
    if (count == 0) continue;
    const double floor = budget / (16.0 * count);
    for (int i = 0; i < vars.num_iots; ++i) {
      const int k = vars.am(i, m);
      if (active[k]) x[k] = std::max(x[k], floor);
      row += x[k];
    }
    if (row > budget) {
      const double scale = budget / row;
      for (int i = 0; i < vars.num_iots; ++i) x[vars.am(i, m)] *= scale;
    }
  }

  auto set = BoxSimplexFeasibleSet::box(x.size(), 0.0, budget);
  for (int m = 0; m < vars.num_uavs; ++m) {
    BoxSimplexFeasibleSet::Group g;
    for (int i = 0; i < vars.num_iots; ++i) g.indices.push_back(vars.am(i, m));
    g.rhs = budget;
    g.equality = false;
    set.add_group(std::move(g));
  }

  if (obj.terms.empty()) {
    vars.uav_power = x;
    return;
  }
  auto result = projected_gradient_min(
      [&](std::span<const double> p) { return obj.value(p); },
      [&](std::span<const double> p, std::span<double> g) { obj.gradient(p, g); }, set,
      std::move(x), opts);
  vars.uav_power = std::move(result.x);
}

namespace {

/// SP3 objective over the stacked [x_0, y_0, x_1, y_1, ...] UAV coordinates.
struct PositionObjective {
  const NetworkScenario* sc;
  const LinkBudget* budget;
  double altitude;
  double d_in;
  double bw;

  struct Hop {
    int uav;
    double px, py;   // ground endpoint
    double power;
    int u;
    double weight;   // alpha * z aggregate
  };
  std::vector<Hop> hops;

  PositionObjective(const DelayEvaluator& eval, const DecisionVariables& vars)
      : sc(&eval.scenario()), budget(&eval.link_budget()),
        altitude(eval.scenario().uav_altitude()),
        d_in(eval.scenario().task_input_bits()),
        bw(eval.scenario().subband_bandwidth()) {
    for (int i = 0; i < vars.num_iots; ++i) {
      for (int m = 0; m < vars.num_uavs; ++m) {
        const double a = vars.relay_select[vars.am(i, m)];
        if (a <= 0.0) continue;
        const double p = vars.uav_power[vars.am(i, m)];
        // Hop 1 aggregates over MECs; hop 2 keeps per-(j,u) structure.
        std::vector<double> w1(vars.num_subbands, 0.0);
        for (int j = 0; j < vars.num_mecs; ++j) {
          for (int u = 0; u < vars.num_subbands; ++u) {
            const double z = vars.association[vars.zi(i, j, u)];
            if (z <= 0.0) continue;
            w1[u] += z;
            hops.push_back({m, sc->mec_positions()[j].x, sc->mec_positions()[j].y, p, u,
                            a * z});
          }
        }
        for (int u = 0; u < vars.num_subbands; ++u) {
          if (w1[u] > 0.0) {
            hops.push_back({m, sc->iot_positions()[i].x, sc->iot_positions()[i].y,
                            sc->iot_tx_power(), u, a * w1[u]});
          }
        }
      }
    }
  }

  double hop_delay(const Hop& h, double x, double y, double* ddelay_dd = nullptr,
                   double* dist_out = nullptr) const {
    const double dx = x - h.px, dy = y - h.py;
    const double d = std::sqrt(dx * dx + dy * dy + altitude * altitude);
    if (dist_out) *dist_out = d;
    if (h.power <= 0.0) return kInf;
    const double snr = h.power * budget->gain(d, h.u) / budget->noise_power;
    const double lg = std::log1p(snr);
    const double t = d_in * M_LN2 / (bw * lg);
    if (ddelay_dd) {
      const double g = 1.0 + snr;
      const double k = budget->subband_k[h.u];
      *ddelay_dd = d_in * M_LN2 / bw * snr * (k + 2.0 / d) / (g * lg * lg);
    }
    return t;
  }

  double value(std::span<const double> q) const {
    double total = 0.0;
    for (const auto& h : hops) {
      total += h.weight * hop_delay(h, q[2 * h.uav], q[2 * h.uav + 1]);
    }
    return total;
  }

  void gradient(std::span<const double> q, std::span<double> g) const {
    std::fill(g.begin(), g.end(), 0.0);
    for (const auto& h : hops) {
      const double x = q[2 * h.uav], y = q[2 * h.uav + 1];
      double dtdd = 0.0, d = 0.0;
      hop_delay(h, x, y, &dtdd, &d);
      const double common = h.weight * dtdd / d;
      g[2 * h.uav] += common * (x - h.px);
      g[2 * h.uav + 1] += common * (y - h.py);
    }
  }
};

}  // namespace

int count_position_convexity_violations(const DelayEvaluator& eval,
                                        const DecisionVariables& vars) {
  int violations = 0;
  const auto& budget = eval.link_budget();
  const auto& sc = eval.scenario();
  for (int i = 0; i < vars.num_iots; ++i) {
    for (int m = 0; m < vars.num_uavs; ++m) {
      const double a = vars.relay_select[vars.am(i, m)];
      if (a <= 0.0) continue;
      for (int j = 0; j < vars.num_mecs; ++j) {
        for (int u = 0; u < vars.num_subbands; ++u) {
          if (vars.association[vars.zi(i, j, u)] <= 0.0) continue;
          const double d1 = distance(sc.iot_positions()[i], vars.uav_positions[m]);
          const double d2 = distance(vars.uav_positions[m], sc.mec_positions()[j]);
          const double g1 = 1.0 + budget.snr(d1, sc.iot_tx_power(), u);
          const double g2 = 1.0 + budget.snr(d2, vars.uav_power[vars.am(i, m)], u);
          if (g1 >= kSp3ConvexitySnrLimit || g2 >= kSp3ConvexitySnrLimit) ++violations;
        }
      }
    }
  }
  return violations;
}

int solve_positions_pg(DelayEvaluator& eval, DecisionVariables& vars, const PgOptions& opts) {
  if (vars.num_uavs == 0) return 0;
  const int warnings = count_position_convexity_violations(eval, vars);

  PositionObjective obj(eval, vars);
  if (!obj.hops.empty()) {
    std::vector<double> q0(2 * vars.num_uavs);
    for (int m = 0; m < vars.num_uavs; ++m) {
      q0[2 * m] = vars.uav_positions[m].x;
      q0[2 * m + 1] = vars.uav_positions[m].y;
    }
    const double side = eval.scenario().area_side();
    auto set = BoxSimplexFeasibleSet::box(q0.size(), 0.0, std::max(side, 1.0));
    auto result = projected_gradient_min(
        [&](std::span<const double> q) { return obj.value(q); },
        [&](std::span<const double> q, std::span<double> g) { obj.gradient(q, g); }, set,
        std::move(q0), opts);
    // Only served UAVs have objective terms; unserved coordinates have zero
    // gradient and stay put.
    for (int m = 0; m < vars.num_uavs; ++m) {
      vars.uav_positions[m].x = result.x[2 * m];
      vars.uav_positions[m].y = result.x[2 * m + 1];
    }
  }
  eval.refresh_uav_gains(vars);
  return warnings;
}

void round_relay(DecisionVariables& vars) {
  for (int i = 0; i < vars.num_iots; ++i) {
    int best = -1;
    double top = 0.0;
    for (int m = 0; m < vars.num_uavs; ++m) {
      const double a = vars.relay_select[vars.am(i, m)];
      if (a > top) {
        top = a;
        best = m;
      }
    }
    for (int m = 0; m < vars.num_uavs; ++m) vars.relay_select[vars.am(i, m)] = 0.0;
    if (best >= 0 && top >= 0.5) vars.relay_select[vars.am(i, best)] = 1.0;
  }
  vars.relay_slack = vars.relay_select;
}

bool round_association(const DelayEvaluator& eval, DecisionVariables& vars, double margin) {
  const auto& sc = eval.scenario();
  const int num_i = vars.num_iots;
  const int num_j = vars.num_mecs;
  const int num_u = vars.num_subbands;
  const double cap = sc.queue().total_service_rate() - margin;
  const auto& rates = sc.arrival_rates();

  struct Entry {
    double value;
    int i, j, u;
  };
  std::vector<Entry> entries;
  entries.reserve(vars.association.size());
  for (int i = 0; i < num_i; ++i) {
    for (int j = 0; j < num_j; ++j) {
      for (int u = 0; u < num_u; ++u) {
        entries.push_back({vars.association[vars.zi(i, j, u)], i, j, u});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    return a.u < b.u;
  });

  std::vector<int> pick_j(num_i, -1), pick_u(num_i, -1);
  std::vector<bool> used_u(num_u, false);
  std::vector<double> load(num_j, 0.0);
  for (const auto& e : entries) {
    if (e.value <= 0.0) break;
    if (pick_j[e.i] >= 0 || used_u[e.u]) continue;
    if (load[e.j] + rates[e.i] > cap) continue;
    pick_j[e.i] = e.j;
    pick_u[e.i] = e.u;
    used_u[e.u] = true;
    load[e.j] += rates[e.i];
  }

  // Repair pass: place leftover IoTs on the best remaining stable slot,
  // scored by shadow-priced communication delay plus the marginal bound.
  bool repaired = false;
  const int s = sc.queue().computing_units;
  const double mu = sc.queue().unit_service_rate;
  for (int i = 0; i < num_i; ++i) {
    if (pick_j[i] >= 0) continue;
    repaired = true;
    int relay_m = -1;
    for (int m = 0; m < vars.num_uavs; ++m) {
      if (vars.relay_select[vars.am(i, m)] >= 0.5) relay_m = m;
    }
    double best_score = kInf;
    int bj = -1, bu = -1;
    for (int j = 0; j < num_j; ++j) {
      if (load[j] + rates[i] > cap) continue;
      for (int u = 0; u < num_u; ++u) {
        if (used_u[u]) continue;
        double comm;
        if (relay_m >= 0) {
          double p = vars.uav_power[vars.am(i, relay_m)];
          if (p <= 0.0) p = sc.uav_tx_power_budget();
          comm = eval.relay_hop1(i, relay_m, u) + eval.relay_hop2(relay_m, j, u, p);
        } else {
          comm = eval.direct_delay(i, j, u);
        }
        const double score = comm + operation_delay_upper(s, mu, load[j] + rates[i]);
        if (score < best_score) {
          best_score = score;
          bj = j;
          bu = u;
        }
      }
    }
    require(bj >= 0, ErrorCode::infeasible,
            "association rounding: no stable (MEC, sub-band) slot left for IoT " +
                std::to_string(i));
    pick_j[i] = bj;
    pick_u[i] = bu;
    used_u[bu] = true;
    load[bj] += rates[i];
  }

  std::fill(vars.association.begin(), vars.association.end(), 0.0);
  for (int i = 0; i < num_i; ++i) {
    vars.association[vars.zi(i, pick_j[i], pick_u[i])] = 1.0;
  }
  vars.association_slack = vars.association;
  return repaired;
}

void finalize_solution(DelayEvaluator& eval, DecisionVariables& vars) {
  const auto& sc = eval.scenario();
  if (vars.num_uavs > 0) {
    // Canonical start: served UAVs at the centroid of their hop endpoints,
    // unserved ones at the IoT centroid. Depends only on (scenario, alpha, z).
    Vec3 iot_centroid{0.0, 0.0, sc.uav_altitude()};
    for (const auto& p : sc.iot_positions()) {
      iot_centroid.x += p.x;
      iot_centroid.y += p.y;
    }
    iot_centroid.x /= sc.num_iots();
    iot_centroid.y /= sc.num_iots();

    for (int m = 0; m < vars.num_uavs; ++m) {
      double sx = 0.0, sy = 0.0, weight = 0.0;
      for (int i = 0; i < vars.num_iots; ++i) {
        if (vars.relay_select[vars.am(i, m)] < 0.5) continue;
        for (int j = 0; j < vars.num_mecs; ++j) {
          double zw = 0.0;
          for (int u = 0; u < vars.num_subbands; ++u) {
            zw += vars.association[vars.zi(i, j, u)];
          }
          if (zw <= 0.0) continue;
          sx += zw * (sc.iot_positions()[i].x + sc.mec_positions()[j].x);
          sy += zw * (sc.iot_positions()[i].y + sc.mec_positions()[j].y);
          weight += 2.0 * zw;
        }
      }
      if (weight > 0.0) {
        vars.uav_positions[m] = {sx / weight, sy / weight, sc.uav_altitude()};
      } else {
        vars.uav_positions[m] = iot_centroid;
      }
    }
    eval.refresh_uav_gains(vars);

    PgOptions pos_opts;
    pos_opts.tol = 1e-9;
    pos_opts.max_iter = 400;
    pos_opts.initial_step = std::max(1.0, sc.area_side());
    double prev = kInf;
    for (int pass = 0; pass < 20; ++pass) {
      solve_power_closed_form(eval, vars);
      solve_positions_pg(eval, vars, pos_opts);
      double comm = 0.0;
      for (int i = 0; i < vars.num_iots; ++i) comm += eval.communication_delay(vars, i);
      if (std::abs(prev - comm) <= 1e-9 * std::max(1.0, std::abs(comm))) break;
      prev = comm;
    }
    solve_power_closed_form(eval, vars);
  }
}

DecisionVariables initialize_variables(const NetworkScenario& scenario, uint64_t seed,
                                       double margin) {
  DecisionVariables vars = DecisionVariables::make(scenario);
  if (scenario.num_uavs() > 0) {
    vars.uav_positions = scenario.initial_uav_positions()
                             ? *scenario.initial_uav_positions()
                             : init_uav_positions(scenario, seed);
  }

  // Nearest stable MEC, sub-bands handed out in IoT order.
  const double cap = scenario.queue().total_service_rate() - margin;
  const auto& rates = scenario.arrival_rates();
  std::vector<double> load(scenario.num_mecs(), 0.0);
  int next_u = 0;
  for (int i = 0; i < scenario.num_iots(); ++i) {
    std::vector<int> order(scenario.num_mecs());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = distance(scenario.iot_positions()[i], scenario.mec_positions()[a]);
      const double db = distance(scenario.iot_positions()[i], scenario.mec_positions()[b]);
      if (da != db) return da < db;
      return a < b;
    });
    int chosen = -1;
    for (int j : order) {
      if (load[j] + rates[i] <= cap) {
        chosen = j;
        break;
      }
    }
    require(chosen >= 0, ErrorCode::infeasible,
            "initialization: nearest-MEC assignment found no stable server for IoT " +
                std::to_string(i));
    vars.association[vars.zi(i, chosen, next_u)] = 1.0;
    load[chosen] += rates[i];
    ++next_u;
  }

  if (scenario.num_uavs() > 0) {
    const double p0 = scenario.uav_tx_power_budget() / scenario.num_iots();
    std::fill(vars.uav_power.begin(), vars.uav_power.end(), p0);
    DelayEvaluator eval(scenario);
    eval.refresh_uav_gains(vars);
    apply_relay_rule(vars, compute_relay_pricing(eval, vars));
  }

  const DualState duals = DualState::initial(scenario, 1.0, 1.0, 0.8);
  update_relay_slack(vars, duals);
  update_association_slack(vars, duals);
  return vars;
}

bool binary_point_feasible(const NetworkScenario& scenario, const DecisionVariables& vars,
                           double tol) {
  for (double a : vars.relay_select) {
    if (std::abs(a) > tol && std::abs(a - 1.0) > tol) return false;
  }
  for (double z : vars.association) {
    if (std::abs(z) > tol && std::abs(z - 1.0) > tol) return false;
  }
  for (int i = 0; i < vars.num_iots; ++i) {
    if (vars.alpha_row_sum(i) > 1.0 + tol) return false;  // (1)
    if (std::abs(vars.z_row_sum(i) - 1.0) > tol) return false;  // (4)
  }
  for (int m = 0; m < vars.num_uavs; ++m) {  // (2)
    double sum = 0.0;
    for (int i = 0; i < vars.num_iots; ++i) sum += vars.uav_power[vars.am(i, m)];
    if (sum > scenario.uav_tx_power_budget() + 1e-9) return false;
  }
  for (int u = 0; u < vars.num_subbands; ++u) {  // (3), as at-most-one when U > I
    double sum = 0.0;
    for (int i = 0; i < vars.num_iots; ++i) {
      for (int j = 0; j < vars.num_mecs; ++j) sum += vars.association[vars.zi(i, j, u)];
    }
    if (sum > 1.0 + tol) return false;
    if (vars.num_subbands == vars.num_iots && std::abs(sum - 1.0) > tol) return false;
  }
  const auto loads = vars.mec_loads(scenario);
  for (double l : loads) {  // (5)
    if (l >= scenario.queue().total_service_rate()) return false;
  }
  return true;
}

}  // namespace thzmec

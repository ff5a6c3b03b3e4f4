#include "thzmec/delay_model.hpp"

#include <cmath>
#include <limits>

#include "thzmec/error.hpp"
#include "thzmec/queueing.hpp"

namespace thzmec {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DecisionVariables DecisionVariables::make(const NetworkScenario& scenario) {
  DecisionVariables v;
  v.num_iots = scenario.num_iots();
  v.num_mecs = scenario.num_mecs();
  v.num_subbands = scenario.num_subbands();
  v.num_uavs = scenario.num_uavs();
  v.relay_select.assign(static_cast<std::size_t>(v.num_iots) * v.num_uavs, 0.0);
  v.relay_slack = v.relay_select;
  v.uav_power = v.relay_select;
  v.uav_positions.assign(v.num_uavs, Vec3{0.0, 0.0, scenario.uav_altitude()});
  v.association.assign(
      static_cast<std::size_t>(v.num_iots) * v.num_mecs * v.num_subbands, 0.0);
  v.association_slack = v.association;
  return v;
}

double DecisionVariables::alpha_row_sum(int i) const {
  double s = 0.0;
  for (int m = 0; m < num_uavs; ++m) s += relay_select[am(i, m)];
  return s;
}

double DecisionVariables::z_row_sum(int i) const {
  double s = 0.0;
  for (int j = 0; j < num_mecs; ++j) {
    for (int u = 0; u < num_subbands; ++u) s += association[zi(i, j, u)];
  }
  return s;
}

std::vector<double> DecisionVariables::mec_loads(const NetworkScenario& scenario) const {
  std::vector<double> loads(num_mecs, 0.0);
  const auto& rates = scenario.arrival_rates();
  for (int i = 0; i < num_iots; ++i) {
    for (int j = 0; j < num_mecs; ++j) {
      double w = 0.0;
      for (int u = 0; u < num_subbands; ++u) w += association[zi(i, j, u)];
      loads[j] += w * rates[i];
    }
  }
  return loads;
}

DualState DualState::initial(const NetworkScenario& scenario, double rho_alpha, double rho_z,
                             double shrink_c) {
  require(rho_alpha > 0.0 && rho_z > 0.0, ErrorCode::invalid_argument,
          "dual state: penalty parameters must be positive");
  require(shrink_c > 0.0 && shrink_c < 1.0, ErrorCode::invalid_argument,
          "dual state: shrink factor must lie in (0, 1)");
  DualState d;
  const std::size_t im = static_cast<std::size_t>(scenario.num_iots()) * scenario.num_uavs();
  const std::size_t iju = static_cast<std::size_t>(scenario.num_iots()) * scenario.num_mecs() *
                          scenario.num_subbands();
  d.eta_alpha1.assign(im, 0.0);
  d.eta_alpha2.assign(im, 0.0);
  d.eta_z1.assign(iju, 0.0);
  d.eta_z2.assign(iju, 0.0);
  d.eta_z_u.assign(scenario.num_subbands(), 0.0);
  d.eta_z_i.assign(scenario.num_iots(), 0.0);
  d.rho_alpha = rho_alpha;
  d.rho_z = rho_z;
  d.shrink_c = shrink_c;
  return d;
}

double direct_delay(const NetworkScenario& sc, int i, int j, int u) {
  const double d = distance(sc.iot_positions()[i], sc.mec_positions()[j]);
  const double rate = long_term_rate(LinkKind::iot_to_mec, d, sc.iot_tx_power(), u + 1, sc);
  if (rate <= 0.0) return kInf;
  return sc.task_input_bits() / rate;
}

double relay_delay(const NetworkScenario& sc, const DecisionVariables& vars, int i, int j,
                   int m, int u) {
  const double p = vars.uav_power[vars.am(i, m)];
  require(p >= 0.0, ErrorCode::invalid_argument, "relay_delay: negative UAV power");
  const double d1 = distance(sc.iot_positions()[i], vars.uav_positions[m]);
  const double d2 = distance(vars.uav_positions[m], sc.mec_positions()[j]);
  const double r1 = long_term_rate(LinkKind::iot_to_uav, d1, sc.iot_tx_power(), u + 1, sc);
  const double r2 = long_term_rate(LinkKind::uav_to_mec, d2, p, u + 1, sc);
  if (r1 <= 0.0 || r2 <= 0.0) return kInf;
  return sc.task_input_bits() / r1 + sc.task_input_bits() / r2;
}

double communication_delay(const NetworkScenario& sc, const DecisionVariables& vars, int i) {
  const double alpha_i = vars.alpha_row_sum(i);
  double total = 0.0;
  for (int j = 0; j < vars.num_mecs; ++j) {
    for (int u = 0; u < vars.num_subbands; ++u) {
      const double zv = vars.association[vars.zi(i, j, u)];
      if (zv == 0.0) continue;
      double term = (1.0 - alpha_i) * direct_delay(sc, i, j, u);
      for (int m = 0; m < vars.num_uavs; ++m) {
        const double a = vars.relay_select[vars.am(i, m)];
        if (a > 0.0) term += a * relay_delay(sc, vars, i, j, m, u);
      }
      total += zv * term;
    }
  }
  return total;
}

double computation_delay(const NetworkScenario& sc, const DecisionVariables& vars, int i,
                         DelayBound bound) {
  const auto loads = vars.mec_loads(sc);
  const int s = sc.queue().computing_units;
  const double mu = sc.queue().unit_service_rate;
  double total = 0.0;
  for (int j = 0; j < vars.num_mecs; ++j) {
    double w = 0.0;
    for (int u = 0; u < vars.num_subbands; ++u) w += vars.association[vars.zi(i, j, u)];
    if (w == 0.0) continue;
    if (loads[j] >= s * mu) {
      if (bound == DelayBound::exact) {
        fail(ErrorCode::infeasible, "computation_delay: MEC " + std::to_string(j) +
                                        " is unstable at load " + std::to_string(loads[j]));
      }
      return kInf;
    }
    total += w * (bound == DelayBound::exact ? operation_delay(s, mu, loads[j])
                                             : operation_delay_upper(s, mu, loads[j]));
  }
  return total;
}

namespace {

double sq(double x) { return x * x; }

}  // namespace

double penalty_alpha(const DecisionVariables& vars, const DualState& duals) {
  double total = 0.0;
  for (std::size_t k = 0; k < vars.relay_select.size(); ++k) {
    const double a = vars.relay_select[k];
    const double as = vars.relay_slack[k];
    total += sq(a * (as - 1.0) + duals.rho_alpha * duals.eta_alpha1[k]);
    total += sq(a - as + duals.rho_alpha * duals.eta_alpha2[k]);
  }
  return total;
}

double penalty_z(const DecisionVariables& vars, const DualState& duals) {
  double total = 0.0;
  for (std::size_t k = 0; k < vars.association.size(); ++k) {
    const double z = vars.association[k];
    const double zs = vars.association_slack[k];
    total += sq(z * (zs - 1.0) + duals.rho_z * duals.eta_z1[k]);
    total += sq(z - zs + duals.rho_z * duals.eta_z2[k]);
  }
  for (int u = 0; u < vars.num_subbands; ++u) {
    double sum = 0.0;
    for (int i = 0; i < vars.num_iots; ++i) {
      for (int j = 0; j < vars.num_mecs; ++j) sum += vars.association[vars.zi(i, j, u)];
    }
    total += sq(sum - 1.0 + duals.rho_z * duals.eta_z_u[u]);
  }
  for (int i = 0; i < vars.num_iots; ++i) {
    total += sq(vars.z_row_sum(i) - 1.0 + duals.rho_z * duals.eta_z_i[i]);
  }
  return total;
}

double al_objective(const NetworkScenario& sc, const DecisionVariables& vars,
                    const DualState& duals, DelayBound bound) {
  return DelayEvaluator(sc).al_objective(vars, duals, bound);
}

double violation(const DecisionVariables& vars) {
  double h = 0.0;
  for (std::size_t k = 0; k < vars.relay_select.size(); ++k) {
    const double a = vars.relay_select[k];
    const double as = vars.relay_slack[k];
    h = std::max(h, std::abs(a * (as - 1.0)));
    h = std::max(h, std::abs(a - as));
  }
  for (std::size_t k = 0; k < vars.association.size(); ++k) {
    const double z = vars.association[k];
    const double zs = vars.association_slack[k];
    h = std::max(h, std::abs(z * (zs - 1.0)));
    h = std::max(h, std::abs(z - zs));
  }
  for (int u = 0; u < vars.num_subbands; ++u) {
    double sum = 0.0;
    for (int i = 0; i < vars.num_iots; ++i) {
      for (int j = 0; j < vars.num_mecs; ++j) sum += vars.association[vars.zi(i, j, u)];
    }
    h = std::max(h, std::abs(sum - 1.0));
  }
  for (int i = 0; i < vars.num_iots; ++i) {
    h = std::max(h, std::abs(vars.z_row_sum(i) - 1.0));
  }
  return h;
}

DelayEvaluator::DelayEvaluator(const NetworkScenario& scenario)
    : sc_(&scenario), budget_(scenario) {
  const int num_i = scenario.num_iots();
  const int num_j = scenario.num_mecs();
  const int num_u = scenario.num_subbands();
  t_direct_.resize(static_cast<std::size_t>(num_i) * num_j * num_u);
  for (int i = 0; i < num_i; ++i) {
    for (int j = 0; j < num_j; ++j) {
      const double d = distance(scenario.iot_positions()[i], scenario.mec_positions()[j]);
      for (int u = 0; u < num_u; ++u) {
        const double rate = budget_.rate_direct(d, scenario.iot_tx_power(), u);
        t_direct_[idx(i, j, u)] = rate > 0.0 ? scenario.task_input_bits() / rate : kInf;
      }
    }
  }
  gain_ium_.assign(static_cast<std::size_t>(num_i) * scenario.num_uavs() * num_u, 0.0);
  gain_mju_.assign(static_cast<std::size_t>(scenario.num_uavs()) * num_j * num_u, 0.0);
}

void DelayEvaluator::refresh_uav_gains(const DecisionVariables& vars) {
  const int num_i = sc_->num_iots();
  const int num_j = sc_->num_mecs();
  const int num_u = sc_->num_subbands();
  const int num_m = sc_->num_uavs();
  for (int i = 0; i < num_i; ++i) {
    for (int m = 0; m < num_m; ++m) {
      const double d = distance(sc_->iot_positions()[i], vars.uav_positions[m]);
      for (int u = 0; u < num_u; ++u) {
        gain_ium_[(i * num_m + m) * num_u + u] = budget_.gain(d, u);
      }
    }
  }
  for (int m = 0; m < num_m; ++m) {
    for (int j = 0; j < num_j; ++j) {
      const double d = distance(vars.uav_positions[m], sc_->mec_positions()[j]);
      for (int u = 0; u < num_u; ++u) {
        gain_mju_[(m * num_j + j) * num_u + u] = budget_.gain(d, u);
      }
    }
  }
}

double DelayEvaluator::relay_hop1(int i, int m, int u) const {
  const double gain = gain_ium_[(i * sc_->num_uavs() + m) * sc_->num_subbands() + u];
  const double snr = sc_->iot_tx_power() * gain / budget_.noise_power;
  const double rate = budget_.bandwidth * std::log2(1.0 + snr);
  return rate > 0.0 ? sc_->task_input_bits() / rate : kInf;
}

double DelayEvaluator::relay_hop2(int m, int j, int u, double p) const {
  if (p <= 0.0) return kInf;
  const double gain = gain_mju_[(m * sc_->num_mecs() + j) * sc_->num_subbands() + u];
  const double snr = p * gain / budget_.noise_power;
  const double rate = budget_.bandwidth * std::log2(1.0 + snr);
  return rate > 0.0 ? sc_->task_input_bits() / rate : kInf;
}

double DelayEvaluator::communication_delay(const DecisionVariables& vars, int i) const {
  const double alpha_i = vars.alpha_row_sum(i);
  const int num_j = vars.num_mecs;
  const int num_u = vars.num_subbands;
  double total = 0.0;
  for (int j = 0; j < num_j; ++j) {
    for (int u = 0; u < num_u; ++u) {
      const double zv = vars.association[vars.zi(i, j, u)];
      if (zv == 0.0) continue;
      double term = (1.0 - alpha_i) * t_direct_[idx(i, j, u)];
      for (int m = 0; m < vars.num_uavs; ++m) {
        const double a = vars.relay_select[vars.am(i, m)];
        if (a > 0.0) {
          term += a * (relay_hop1(i, m, u) + relay_hop2(m, j, u, vars.uav_power[vars.am(i, m)]));
        }
      }
      total += zv * term;
    }
  }
  return total;
}

double DelayEvaluator::computation_delay(const DecisionVariables& vars, int i,
                                         DelayBound bound) const {
  return thzmec::computation_delay(*sc_, vars, i, bound);
}

DelayBreakdown DelayEvaluator::evaluate(const DecisionVariables& vars, const DualState* duals,
                                        DelayBound bound) const {
  const int num_i = vars.num_iots;
  DelayBreakdown out;
  out.comm.resize(num_i);
  out.comp.resize(num_i);
  out.serv.resize(num_i);

  const auto loads = vars.mec_loads(*sc_);
  const int s = sc_->queue().computing_units;
  const double mu = sc_->queue().unit_service_rate;
  std::vector<double> t_oper(vars.num_mecs, 0.0);
  bool unstable = false;
  for (int j = 0; j < vars.num_mecs; ++j) {
    if (loads[j] >= s * mu) {
      unstable = true;
      t_oper[j] = kInf;
    } else {
      t_oper[j] = bound == DelayBound::exact ? operation_delay(s, mu, loads[j])
                                             : operation_delay_upper(s, mu, loads[j]);
    }
  }
  if (unstable && bound == DelayBound::exact) {
    fail(ErrorCode::infeasible, "evaluate: an MEC queue is unstable under this association");
  }

  double sum_serv = 0.0;
  for (int i = 0; i < num_i; ++i) {
    out.comm[i] = communication_delay(vars, i);
    double comp = 0.0;
    for (int j = 0; j < vars.num_mecs; ++j) {
      double w = 0.0;
      for (int u = 0; u < vars.num_subbands; ++u) w += vars.association[vars.zi(i, j, u)];
      if (w > 0.0) comp += w * t_oper[j];
    }
    out.comp[i] = comp;
    out.serv[i] = out.comm[i] + out.comp[i];
    sum_serv += out.serv[i];
  }
  out.mean_service_delay = sum_serv / num_i;
  if (duals) {
    out.penalty = penalty_alpha(vars, *duals) / (2.0 * duals->rho_alpha) +
                  penalty_z(vars, *duals) / (2.0 * duals->rho_z);
  }
  out.al_objective = sum_serv + out.penalty;
  return out;
}

double DelayEvaluator::al_objective(const DecisionVariables& vars, const DualState& duals,
                                    DelayBound bound) const {
  double sum_serv = 0.0;
  const auto loads = vars.mec_loads(*sc_);
  const int s = sc_->queue().computing_units;
  const double mu = sc_->queue().unit_service_rate;
  std::vector<double> t_oper(vars.num_mecs, 0.0);
  for (int j = 0; j < vars.num_mecs; ++j) {
    t_oper[j] = loads[j] >= s * mu
                    ? kInf
                    : (bound == DelayBound::exact ? operation_delay(s, mu, loads[j])
                                                  : operation_delay_upper(s, mu, loads[j]));
  }
  for (int i = 0; i < vars.num_iots; ++i) {
    sum_serv += communication_delay(vars, i);
    for (int j = 0; j < vars.num_mecs; ++j) {
      double w = 0.0;
      for (int u = 0; u < vars.num_subbands; ++u) w += vars.association[vars.zi(i, j, u)];
      if (w > 0.0) sum_serv += w * t_oper[j];
    }
  }
  return sum_serv + penalty_alpha(vars, duals) / (2.0 * duals.rho_alpha) +
         penalty_z(vars, duals) / (2.0 * duals.rho_z);
}

}  // namespace thzmec

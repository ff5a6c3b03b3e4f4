#pragma once

#include <optional>
#include <vector>

#include "thzmec/scenario.hpp"

namespace thzmec {

enum class DelayBound { exact, upper };

/// The optimisation state shared by every solver: relay selection alpha and
/// its slack, UAV transmit powers, UAV positions, association z and its slack.
struct DecisionVariables {
  int num_iots = 0, num_mecs = 0, num_subbands = 0, num_uavs = 0;
  std::vector<double> relay_select;       // alpha, I x M
  std::vector<double> relay_slack;        // alpha~, I x M
  std::vector<double> uav_power;          // P, I x M, W
  std::vector<Vec3> uav_positions;        // q, M entries, z fixed at H
  std::vector<double> association;        // z, I x J x U
  std::vector<double> association_slack;  // z~, I x J x U

  static DecisionVariables make(const NetworkScenario& scenario);

  int am(int i, int m) const { return i * num_uavs + m; }
  int zi(int i, int j, int u) const { return (i * num_mecs + j) * num_subbands + u; }

  double alpha(int i, int m) const { return relay_select[am(i, m)]; }
  double alpha_row_sum(int i) const;
  double z(int i, int j, int u) const { return association[zi(i, j, u)]; }
  double z_row_sum(int i) const;

  /// Total arrival rate routed to MEC j: sum_i sum_u z * lambda_i.
  std::vector<double> mec_loads(const NetworkScenario& scenario) const;
};

/// PDD dual variables and penalty parameters.
struct DualState {
  std::vector<double> eta_alpha1, eta_alpha2;  // I x M
  std::vector<double> eta_z1, eta_z2;          // I x J x U
  std::vector<double> eta_z_u;                 // U
  std::vector<double> eta_z_i;                 // I
  double rho_alpha = 1.0;
  double rho_z = 1.0;
  double shrink_c = 0.8;

  static DualState initial(const NetworkScenario& scenario, double rho_alpha, double rho_z,
                           double shrink_c);
};

struct DelayBreakdown {
  std::vector<double> comm;  // per IoT, s
  std::vector<double> comp;  // per IoT, s
  std::vector<double> serv;  // comm + comp, exactly
  double mean_service_delay = 0.0;
  double penalty = 0.0;       // Lambda_alpha/(2 rho_alpha) + Lambda_z/(2 rho_z)
  double al_objective = 0.0;  // sum serv + penalty
};

// Spec-level delay operations (0-based indices throughout).
double direct_delay(const NetworkScenario& sc, int i, int j, int u);
double relay_delay(const NetworkScenario& sc, const DecisionVariables& vars, int i, int j,
                   int m, int u);
double communication_delay(const NetworkScenario& sc, const DecisionVariables& vars, int i);
double computation_delay(const NetworkScenario& sc, const DecisionVariables& vars, int i,
                         DelayBound bound);

double penalty_alpha(const DecisionVariables& vars, const DualState& duals);  // Lambda_alpha
double penalty_z(const DecisionVariables& vars, const DualState& duals);      // Lambda_z

double al_objective(const NetworkScenario& sc, const DecisionVariables& vars,
                    const DualState& duals, DelayBound bound);

/// Max constraint-violation indicator h; dual-free by definition.
double violation(const DecisionVariables& vars);

/// Caching evaluator for solver loops. Direct-path delays are fixed per
/// scenario; UAV-hop channel gains are cached and must be refreshed after
/// any UAV position update.
class DelayEvaluator {
 public:
  explicit DelayEvaluator(const NetworkScenario& scenario);

  const NetworkScenario& scenario() const { return *sc_; }
  const LinkBudget& link_budget() const { return budget_; }

  void refresh_uav_gains(const DecisionVariables& vars);

  double direct_delay(int i, int j, int u) const { return t_direct_[idx(i, j, u)]; }
  /// First relay hop IoT i -> UAV m on sub-band u (uses cached gains).
  double relay_hop1(int i, int m, int u) const;
  /// Second relay hop UAV m -> MEC j on sub-band u at power p.
  double relay_hop2(int m, int j, int u, double p) const;
  double hop2_gamma(int m, int j, int u) const {
    return gain_mju_[(m * sc_->num_mecs() + j) * sc_->num_subbands() + u] / budget_.noise_power;
  }

  double communication_delay(const DecisionVariables& vars, int i) const;
  double computation_delay(const DecisionVariables& vars, int i, DelayBound bound) const;
  DelayBreakdown evaluate(const DecisionVariables& vars, const DualState* duals,
                          DelayBound bound) const;
  double al_objective(const DecisionVariables& vars, const DualState& duals,
                      DelayBound bound) const;

 private:
  int idx(int i, int j, int u) const {
    return (i * sc_->num_mecs() + j) * sc_->num_subbands() + u;
  }
  const NetworkScenario* sc_;
  LinkBudget budget_;
  std::vector<double> t_direct_;  // I x J x U
  std::vector<double> gain_ium_;  // I x M x U, hop-1 channel gains
  std::vector<double> gain_mju_;  // M x J x U, hop-2 channel gains
};

}  // namespace thzmec

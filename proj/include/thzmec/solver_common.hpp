#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "thzmec/delay_model.hpp"
#include "thzmec/numerics.hpp"

namespace thzmec {

/// SNR threshold of the UAV-positioning convexity condition: the relaxed
/// sufficient condition holds whenever g = 1 + SNR stays below this value.
inline constexpr double kSp3ConvexitySnrLimit = 41.412;

/// Aggregated per-IoT communication-delay coefficients at the current
/// association z, powers P, and positions q. Relay pairs with no power
/// assigned yet are priced at the equal share they would receive on joining
/// that UAV, so the relay-selection block can activate them.
struct RelayPricing {
  std::vector<double> t_direct;  // per IoT: sum_{j,u} z * t_direct(i,j,u)
  std::vector<double> t_relay;   // per (i,m), shadow-priced second hop
};
RelayPricing compute_relay_pricing(const DelayEvaluator& eval, const DecisionVariables& vars);

/// Theorem-style binary relay rule: IoT i selects the delay-minimising UAV
/// iff it beats the direct path; ties break to the lowest UAV index.
void apply_relay_rule(DecisionVariables& vars, const RelayPricing& pricing);

/// Closed-form slack updates (the unconstrained quadratic minimisers).
void update_relay_slack(DecisionVariables& vars, const DualState& duals);
void update_association_slack(DecisionVariables& vars, const DualState& duals);

/// True when every routed IoT has an essentially binary association row
/// (row mass within tol of 1 and concentrated on one (j, u) entry).
bool association_near_binary(const DecisionVariables& vars, double tol);

/// Finite stand-in for an unusable route inside solver objectives. Real
/// delays stay far below it; reporting paths keep the true +inf sentinel.
inline constexpr double kDelayPriceCeiling = 1e12;

/// Routing weight at which a relay pair with a collapsed association row is
/// still priced in the power block, so the row can recover.
inline constexpr double kDormantRouteWeight = 0.05;

/// Coefficient of z_{j,i}^u in the communication-delay sum at the current
/// relay selection, powers and positions, capped at kDelayPriceCeiling so
/// gradient arithmetic stays finite.
std::vector<double> communication_coefficients(const DelayEvaluator& eval,
                                               const DecisionVariables& vars);

/// Lambert-W / bisection power allocation per UAV (the KKT closed form).
/// Requires a near-binary association; pairs with zero routing weight or
/// zero relay weight get zero power. Per-UAV sums land on the budget to
/// ~1e-12 relative.
void solve_power_closed_form(const DelayEvaluator& eval, DecisionVariables& vars);

/// Convex fallback: projected gradient over the power box with per-UAV caps.
void solve_power_pg(const DelayEvaluator& eval, DecisionVariables& vars, const PgOptions& opts);

/// Per-UAV placement optimisation (projected gradient over the area box).
/// Refreshes the evaluator's UAV gain caches. Returns the number of relay
/// hops at the starting point whose SNR violates the convexity condition.
int solve_positions_pg(DelayEvaluator& eval, DecisionVariables& vars, const PgOptions& opts);

/// Snaps alpha rows to {0,1}: argmax entry when it reaches 0.5, else direct.
void round_relay(DecisionVariables& vars);

/// Greedy association rounding by descending relaxed value, respecting
/// one-IoT-per-sub-band, one-assignment-per-IoT and per-MEC stability.
/// Returns true when the repair pass had to place an IoT. Throws when no
/// stable completion exists.
bool round_association(const DelayEvaluator& eval, DecisionVariables& vars, double margin);

/// Canonical continuous re-solve at a binary (alpha, z): UAV powers by the
/// closed form and positions by projected gradient, alternated to a fixed
/// point from a start that depends only on (scenario, alpha, z). Every
/// algorithm reports its rounded solution through this routine, so equal
/// (alpha, z) points always yield identical delays.
void finalize_solution(DelayEvaluator& eval, DecisionVariables& vars);

/// Shared starting point: UAV positions from the scenario (or k-means with
/// the run seed), nearest-stable-MEC association with sequentially assigned
/// sub-bands, equal power split, relay rule for alpha, slacks closed-form
/// at zero duals.
DecisionVariables initialize_variables(const NetworkScenario& scenario, uint64_t seed,
                                       double margin);

/// Per-MEC loads and the count of hops violating the SP3 convexity condition.
int count_position_convexity_violations(const DelayEvaluator& eval,
                                        const DecisionVariables& vars);

/// Feasibility check of constraints (1)-(5) for a binary point.
bool binary_point_feasible(const NetworkScenario& scenario, const DecisionVariables& vars,
                           double tol = 1e-9);

}  // namespace thzmec

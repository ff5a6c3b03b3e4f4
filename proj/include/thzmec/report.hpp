#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thzmec/delay_model.hpp"

namespace thzmec {

struct DelaySummary {
  double mean_service = 0.0;        // exact t_oper
  double mean_comm = 0.0;
  double mean_comp = 0.0;
  double mean_service_upper = 0.0;  // Harel-bounded t_oper
};

/// One row of the final binary assignment: IoT i offloads to MEC `mec` on
/// sub-band `subband`, through UAV `uav` (-1 for the direct path).
struct FinalAssignment {
  int iot = 0;
  int mec = 0;
  int subband = 0;
  int uav = -1;
  double uav_power_w = 0.0;
};

struct RunReport {
  std::string algorithm;
  uint64_t seed = 0;
  bool converged = false;
  std::string termination_reason;
  int outer_iterations = 0;
  int inner_iterations = 0;

  // Augmented-Lagrangian objective per inner iteration (upper-bound delays),
  // concatenated across outer iterations. Baselines store their per-sweep
  // objective here.
  std::vector<double> objective_trace;
  // Number of inner sweeps in each outer iteration; segments objective_trace.
  std::vector<int> sweeps_per_outer;
  // Constraint-violation indicator h per outer iteration (PDD only).
  std::vector<double> violation_trace;
  double final_violation = 0.0;

  DelaySummary relaxed;
  DelaySummary rounded;
  bool rounding_repaired = false;

  DecisionVariables relaxed_vars;
  DecisionVariables rounded_vars;
  std::vector<FinalAssignment> assignments;

  std::vector<std::string> notes;
  double wall_time_s = 0.0;
};

std::string report_to_json_text(const RunReport& report);

/// Derives the explicit (i -> j, u, m, P) records from binary variables.
std::vector<FinalAssignment> extract_assignments(const DecisionVariables& vars);

DelaySummary summarize_delays(const NetworkScenario& scenario, const DecisionVariables& vars);

}  // namespace thzmec

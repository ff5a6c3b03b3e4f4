#include "thzmec/report.hpp"

#include <json.hpp>

namespace thzmec {

using nlohmann::json;

std::vector<FinalAssignment> extract_assignments(const DecisionVariables& vars) {
  std::vector<FinalAssignment> out;
  out.reserve(vars.num_iots);
  for (int i = 0; i < vars.num_iots; ++i) {
    FinalAssignment a;
    a.iot = i;
    double top = -1.0;
    for (int j = 0; j < vars.num_mecs; ++j) {
      for (int u = 0; u < vars.num_subbands; ++u) {
        const double z = vars.association[vars.zi(i, j, u)];
        if (z > top) {
          top = z;
          a.mec = j;
          a.subband = u;
        }
      }
    }
    for (int m = 0; m < vars.num_uavs; ++m) {
      if (vars.relay_select[vars.am(i, m)] >= 0.5) {
        a.uav = m;
        a.uav_power_w = vars.uav_power[vars.am(i, m)];
      }
    }
    out.push_back(a);
  }
  return out;
}

DelaySummary summarize_delays(const NetworkScenario& scenario, const DecisionVariables& vars) {
  DelayEvaluator eval(scenario);
  eval.refresh_uav_gains(vars);
  const DelayBreakdown exact = eval.evaluate(vars, nullptr, DelayBound::exact);
  const DelayBreakdown upper = eval.evaluate(vars, nullptr, DelayBound::upper);
  DelaySummary s;
  s.mean_service = exact.mean_service_delay;
  s.mean_service_upper = upper.mean_service_delay;
  double comm = 0.0, comp = 0.0;
  for (int i = 0; i < vars.num_iots; ++i) {
    comm += exact.comm[i];
    comp += exact.comp[i];
  }
  s.mean_comm = comm / vars.num_iots;
  s.mean_comp = comp / vars.num_iots;
  return s;
}

namespace {

json summary_to_json(const DelaySummary& s) {
  return json{{"mean_service_delay_s", s.mean_service},
              {"mean_comm_delay_s", s.mean_comm},
              {"mean_comp_delay_s", s.mean_comp},
              {"mean_service_delay_upper_s", s.mean_service_upper}};
}

json matrix_to_json(const std::vector<double>& flat, int rows, int cols) {
  json out = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(flat[r * cols + c]);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string report_to_json_text(const RunReport& r) {
  json doc;
  doc["algorithm"] = r.algorithm;
  doc["seed"] = r.seed;
  doc["converged"] = r.converged;
  doc["termination_reason"] = r.termination_reason;
  doc["outer_iterations"] = r.outer_iterations;
  doc["inner_iterations"] = r.inner_iterations;
  doc["objective_trace"] = r.objective_trace;
  doc["sweeps_per_outer"] = r.sweeps_per_outer;
  doc["violation_trace"] = r.violation_trace;
  doc["final_violation"] = r.final_violation;
  doc["relaxed"] = summary_to_json(r.relaxed);
  doc["rounded"] = summary_to_json(r.rounded);
  doc["rounding_repaired"] = r.rounding_repaired;

  json assignments = json::array();
  for (const auto& a : r.assignments) {
    json row{{"iot", a.iot}, {"mec", a.mec}, {"subband", a.subband}};
    if (a.uav >= 0) {
      row["uav"] = a.uav;
      row["uav_power_w"] = a.uav_power_w;
    } else {
      row["uav"] = nullptr;
    }
    assignments.push_back(std::move(row));
  }
  doc["assignments"] = std::move(assignments);

  json uavs = json::array();
  for (const auto& q : r.rounded_vars.uav_positions) {
    uavs.push_back(json::array({q.x, q.y, q.z}));
  }
  doc["uav_positions"] = std::move(uavs);

  const auto& rv = r.relaxed_vars;
  if (!rv.relay_select.empty() || !rv.association.empty()) {
    doc["relaxed_variables"] =
        json{{"alpha", matrix_to_json(rv.relay_select, rv.num_iots, rv.num_uavs)},
             {"z_flat", rv.association},
             {"z_shape", json::array({rv.num_iots, rv.num_mecs, rv.num_subbands})}};
  }
  doc["notes"] = r.notes;
  doc["wall_time_s"] = r.wall_time_s;
  return doc.dump(2);
}

}  // namespace thzmec

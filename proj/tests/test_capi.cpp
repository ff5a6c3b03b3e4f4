// Exercises the shared-library C API the way an external consumer would.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "thzmec.h"

namespace {

int failures = 0;

#define REQUIRE_C(cond)                                                          \
  do {                                                                           \
    if (!(cond)) {                                                               \
      std::fprintf(stderr, "[FAIL] %s:%d: %s\n", __FILE__, __LINE__, #cond);     \
      ++failures;                                                                \
    }                                                                            \
  } while (0)

const char* kTinyConfig = R"({
  "num_iots": 4, "num_mecs": 2, "num_uavs": 1,
  "area_side_m": 200.0, "uav_altitude_m": 20.0,
  "lambda_avg_tasks_per_s": 1.2,
  "task_input_bits": 8e7, "iot_tx_power_w": 0.2, "uav_tx_power_budget_w": 2.0,
  "base_frequency_hz": 0.34e12, "subband_bandwidth_hz": 1e9,
  "noise_density_dbm_per_hz": -174,
  "queue": {"computing_units": 2, "unit_service_rate_tasks_per_s": 4.0},
  "blockage": {"blocker_height_m": 1.7, "blocker_radius_m": 0.3,
               "blocker_density_per_m2": 0.2, "mec_height_m": 3.0, "iot_height_m": 0.3}
})";

}  // namespace

int main() {
  REQUIRE_C(std::strcmp(thzmec_status_name(THZMEC_OK), "ok") == 0);
  REQUIRE_C(std::strcmp(thzmec_status_name(THZMEC_ERR_INFEASIBLE), "infeasible") == 0);
  REQUIRE_C(thzmec_version() != nullptr);

  // Null-argument handling.
  REQUIRE_C(thzmec_scenario_generate(nullptr, 1, nullptr) == THZMEC_ERR_INVALID_ARGUMENT);
  REQUIRE_C(thzmec_scenario_load(nullptr, nullptr) == THZMEC_ERR_INVALID_ARGUMENT);

  // Built-in Table I config.
  thzmec_scenario* table1 = nullptr;
  REQUIRE_C(thzmec_scenario_generate(nullptr, 7, &table1) == THZMEC_OK);
  uint32_t iots = 0, mecs = 0, uavs = 0, subbands = 0;
  REQUIRE_C(thzmec_scenario_counts(table1, &iots, &mecs, &uavs, &subbands) == THZMEC_OK);
  REQUIRE_C(iots == 20 && mecs == 4 && uavs == 3 && subbands == 20);
  thzmec_scenario_free(table1);

  // Parse errors surface with a message.
  thzmec_scenario* bad = nullptr;
  REQUIRE_C(thzmec_scenario_from_json("{not json", &bad) == THZMEC_ERR_PARSE);
  REQUIRE_C(bad == nullptr);
  REQUIRE_C(std::strlen(thzmec_last_error()) > 0);

  // Stability-infeasible configs map to THZMEC_ERR_INFEASIBLE.
  std::string hot = kTinyConfig;
  const auto pos = hot.find("1.2");
  hot.replace(pos, 3, "4.5");  // 18 tasks/s >= 2 * 8
  thzmec_scenario* infeasible = nullptr;
  REQUIRE_C(thzmec_scenario_generate(hot.c_str(), 1, &infeasible) == THZMEC_ERR_INFEASIBLE);
  REQUIRE_C(std::strstr(thzmec_last_error(), "stability-infeasible") != nullptr);

  // Generate, serialize, reload: the round trip preserves the JSON.
  thzmec_scenario* tiny = nullptr;
  REQUIRE_C(thzmec_scenario_generate(kTinyConfig, 3, &tiny) == THZMEC_OK);
  char* json1 = nullptr;
  REQUIRE_C(thzmec_scenario_to_json(tiny, &json1) == THZMEC_OK);
  thzmec_scenario* reloaded = nullptr;
  REQUIRE_C(thzmec_scenario_from_json(json1, &reloaded) == THZMEC_OK);
  char* json2 = nullptr;
  REQUIRE_C(thzmec_scenario_to_json(reloaded, &json2) == THZMEC_OK);
  REQUIRE_C(std::strcmp(json1, json2) == 0);
  thzmec_string_free(json2);
  thzmec_scenario_free(reloaded);

  // File save/load.
  const char* path = "capi_scenario_tmp.json";
  REQUIRE_C(thzmec_scenario_save(tiny, path) == THZMEC_OK);
  thzmec_scenario* loaded = nullptr;
  REQUIRE_C(thzmec_scenario_load(path, &loaded) == THZMEC_OK);
  char* json3 = nullptr;
  REQUIRE_C(thzmec_scenario_to_json(loaded, &json3) == THZMEC_OK);
  REQUIRE_C(std::strcmp(json1, json3) == 0);
  thzmec_string_free(json3);
  thzmec_string_free(json1);
  thzmec_scenario_free(loaded);
  std::remove(path);

  // Unknown algorithm and unknown option keys.
  thzmec_report* report = nullptr;
  REQUIRE_C(thzmec_run(tiny, "simulated-annealing", nullptr, 1, &report) ==
            THZMEC_ERR_UNSUPPORTED);
  REQUIRE_C(thzmec_run(tiny, "pdd", "{\"nmax\": 3}", 1, &report) ==
            THZMEC_ERR_INVALID_ARGUMENT);
  REQUIRE_C(std::strstr(thzmec_last_error(), "nmax") != nullptr);

  // A real PDD run through the C API.
  REQUIRE_C(thzmec_run(tiny, "pdd", nullptr, 7, &report) == THZMEC_OK);
  REQUIRE_C(thzmec_report_converged(report) == 1);
  double mean = 0.0, violation = 1.0, upper = 0.0;
  REQUIRE_C(thzmec_report_metric(report, "mean_delay", &mean) == THZMEC_OK);
  REQUIRE_C(thzmec_report_metric(report, "mean_delay_upper", &upper) == THZMEC_OK);
  REQUIRE_C(thzmec_report_metric(report, "violation", &violation) == THZMEC_OK);
  REQUIRE_C(mean > 0.0);
  REQUIRE_C(upper >= mean);
  REQUIRE_C(violation <= 1e-3);
  REQUIRE_C(thzmec_report_metric(report, "no_such_metric", &mean) ==
            THZMEC_ERR_INVALID_ARGUMENT);
  char* report_json = nullptr;
  REQUIRE_C(thzmec_report_to_json(report, &report_json) == THZMEC_OK);
  REQUIRE_C(std::strstr(report_json, "\"algorithm\": \"pdd\"") != nullptr);
  REQUIRE_C(std::strstr(report_json, "\"assignments\"") != nullptr);
  thzmec_string_free(report_json);
  thzmec_report_free(report);

  // Exhaustive refusal surfaces as THZMEC_ERR_REFUSED.
  thzmec_scenario* big = nullptr;
  REQUIRE_C(thzmec_scenario_generate(nullptr, 1, &big) == THZMEC_OK);
  REQUIRE_C(thzmec_run(big, "exhaustive", "{\"n_q1\": 20, \"n_q2\": 40}", 1, &report) ==
            THZMEC_ERR_REFUSED);
  thzmec_scenario_free(big);
  thzmec_scenario_free(tiny);

  // Queueing helpers.
  double value = 0.0;
  REQUIRE_C(thzmec_erlang_c(2, 0.3, &value) == THZMEC_OK);
  REQUIRE_C(std::fabs(value - 0.13846153846153847) < 1e-12);
  REQUIRE_C(thzmec_operation_delay(2, 4.0, 2.4, &value) == THZMEC_OK);
  REQUIRE_C(std::fabs(value - 0.2747252747252747) < 1e-12);
  REQUIRE_C(thzmec_operation_delay_upper(2, 4.0, 2.4, &value) == THZMEC_OK);
  REQUIRE_C(value > 0.2747252747252747);
  REQUIRE_C(thzmec_erlang_c(2, 1.0, &value) == THZMEC_ERR_INFEASIBLE);
  REQUIRE_C(thzmec_operation_delay_upper(1, 4.0, 0.5, &value) ==
            THZMEC_ERR_INVALID_ARGUMENT);

  if (failures == 0) {
    std::printf("test_capi: all checks passed\n");
    return 0;
  }
  std::fprintf(stderr, "test_capi: %d failures\n", failures);
  return 1;
}

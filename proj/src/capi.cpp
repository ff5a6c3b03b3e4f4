#include "thzmec.h"

#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "thzmec/baselines.hpp"
#include "thzmec/error.hpp"
#include "thzmec/pdd.hpp"
#include "thzmec/queueing.hpp"
#include "thzmec/report.hpp"
#include "thzmec/scenario.hpp"

struct thzmec_scenario {
  thzmec::NetworkScenario value;
};

struct thzmec_report {
  thzmec::RunReport value;
};

namespace {

thread_local std::string g_last_error;

thzmec_status to_status(thzmec::ErrorCode code) {
  using thzmec::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return THZMEC_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return THZMEC_ERR_PARSE;
    case ErrorCode::infeasible: return THZMEC_ERR_INFEASIBLE;
    case ErrorCode::domain: return THZMEC_ERR_DOMAIN;
    case ErrorCode::io: return THZMEC_ERR_IO;
    case ErrorCode::unsupported: return THZMEC_ERR_UNSUPPORTED;
    case ErrorCode::refused: return THZMEC_ERR_REFUSED;
    case ErrorCode::internal: return THZMEC_ERR_INTERNAL;
  }
  return THZMEC_ERR_INTERNAL;
}

template <typename Fn>
thzmec_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return THZMEC_OK;
  } catch (const thzmec::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return THZMEC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return THZMEC_ERR_INTERNAL;
  }
}

thzmec_status invalid(const char* message) {
  g_last_error = message;
  return THZMEC_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

double json_number(const nlohmann::json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) {
    thzmec::fail(thzmec::ErrorCode::invalid_argument,
                 std::string("options: '") + key + "' must be a number");
  }
  return doc[key].get<double>();
}

int json_int(const nlohmann::json& doc, const char* key, int fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number_integer()) {
    thzmec::fail(thzmec::ErrorCode::invalid_argument,
                 std::string("options: '") + key + "' must be an integer");
  }
  return doc[key].get<int>();
}

thzmec::RunReport dispatch_run(const thzmec::NetworkScenario& scenario,
                               const std::string& algorithm, const std::string& options_json,
                               uint64_t seed) {
  nlohmann::json options = nlohmann::json::object();
  if (!options_json.empty()) {
    options = nlohmann::json::parse(options_json, nullptr, false);
    if (options.is_discarded() || !options.is_object()) {
      thzmec::fail(thzmec::ErrorCode::parse, "options: not a JSON object");
    }
  }
  static const char* known[] = {"eps_inner", "eps_outer", "n_max", "m_max", "shrink_c",
                                "rho_alpha", "rho_z", "eps", "max_sweeps", "ga_population",
                                "ga_generations", "ga_tournament", "ga_crossover",
                                "ga_mutation", "ga_elitism", "n_q1", "n_q2", "enum_cap"};
  for (const auto& item : options.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      thzmec::fail(thzmec::ErrorCode::invalid_argument,
                   "options: unknown key '" + item.key() + "'");
    }
  }

  thzmec::BaselineConfig base;
  base.eps = json_number(options, "eps", base.eps);
  base.max_sweeps = json_int(options, "max_sweeps", base.max_sweeps);

  if (algorithm == "pdd") {
    thzmec::PddConfig cfg;
    cfg.eps_inner = json_number(options, "eps_inner", cfg.eps_inner);
    cfg.eps_outer = json_number(options, "eps_outer", cfg.eps_outer);
    cfg.n_max = json_int(options, "n_max", cfg.n_max);
    cfg.m_max = json_int(options, "m_max", cfg.m_max);
    cfg.shrink_c = json_number(options, "shrink_c", cfg.shrink_c);
    cfg.rho_alpha0 = json_number(options, "rho_alpha", cfg.rho_alpha0);
    cfg.rho_z0 = json_number(options, "rho_z", cfg.rho_z0);
    return thzmec::run_pdd(scenario, cfg, seed);
  }
  if (algorithm == "uo") return thzmec::run_uo(scenario, base, seed);
  if (algorithm == "uao") return thzmec::run_uao(scenario, base, seed);
  if (algorithm == "nr-sca") return thzmec::run_nr_sca(scenario, base, seed);
  if (algorithm == "uo-guao") {
    thzmec::GaConfig ga;
    ga.population = json_int(options, "ga_population", ga.population);
    ga.generations = json_int(options, "ga_generations", ga.generations);
    ga.tournament = json_int(options, "ga_tournament", ga.tournament);
    ga.crossover_rate = json_number(options, "ga_crossover", ga.crossover_rate);
    ga.mutation_rate = json_number(options, "ga_mutation", ga.mutation_rate);
    ga.elitism = json_int(options, "ga_elitism", ga.elitism);
    return thzmec::run_uo_guao(scenario, base, ga, seed);
  }
  if (algorithm == "bcd-sca") return thzmec::run_bcd_sca(scenario, base, seed);
  if (algorithm == "exhaustive") {
    thzmec::QuantizationGrid grid;
    grid.n_q1 = json_int(options, "n_q1", grid.n_q1);
    grid.n_q2 = json_int(options, "n_q2", grid.n_q2);
    grid.enum_cap = json_number(options, "enum_cap", grid.enum_cap);
    return thzmec::run_exhaustive(scenario, grid, base);
  }
  thzmec::fail(thzmec::ErrorCode::unsupported, "unknown algorithm '" + algorithm + "'");
}

}  // namespace

extern "C" {

const char* thzmec_version(void) { return "0.1.0"; }

const char* thzmec_status_name(thzmec_status status) {
  switch (status) {
    case THZMEC_OK: return "ok";
    case THZMEC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case THZMEC_ERR_PARSE: return "parse_error";
    case THZMEC_ERR_INFEASIBLE: return "infeasible";
    case THZMEC_ERR_DOMAIN: return "domain_error";
    case THZMEC_ERR_IO: return "io_error";
    case THZMEC_ERR_UNSUPPORTED: return "unsupported";
    case THZMEC_ERR_REFUSED: return "refused";
    case THZMEC_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* thzmec_last_error(void) { return g_last_error.c_str(); }

void thzmec_string_free(char* text) { delete[] text; }

thzmec_status thzmec_scenario_generate(const char* config_json, uint64_t seed,
                                       thzmec_scenario** out) {
  if (!out) return invalid("thzmec_scenario_generate: out is NULL");
  *out = nullptr;
  return guarded([&] {
    thzmec::ScenarioConfig config =
        (config_json && *config_json) ? thzmec::config_from_json_text(config_json)
                                      : thzmec::ScenarioConfig::table1();
    *out = new thzmec_scenario{thzmec::generate_scenario(seed, config)};
  });
}

thzmec_status thzmec_scenario_from_json(const char* json_text, thzmec_scenario** out) {
  if (!out) return invalid("thzmec_scenario_from_json: out is NULL");
  if (!json_text) return invalid("thzmec_scenario_from_json: json_text is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new thzmec_scenario{thzmec::scenario_from_json_text(json_text)};
  });
}

thzmec_status thzmec_scenario_load(const char* path, thzmec_scenario** out) {
  if (!out) return invalid("thzmec_scenario_load: out is NULL");
  if (!path) return invalid("thzmec_scenario_load: path is NULL");
  *out = nullptr;
  return guarded([&] { *out = new thzmec_scenario{thzmec::load_scenario(path)}; });
}

thzmec_status thzmec_scenario_save(const thzmec_scenario* scenario, const char* path) {
  if (!scenario) return invalid("thzmec_scenario_save: scenario is NULL");
  if (!path) return invalid("thzmec_scenario_save: path is NULL");
  return guarded([&] { thzmec::save_scenario(scenario->value, path); });
}

thzmec_status thzmec_scenario_to_json(const thzmec_scenario* scenario, char** out_text) {
  if (!scenario) return invalid("thzmec_scenario_to_json: scenario is NULL");
  if (!out_text) return invalid("thzmec_scenario_to_json: out_text is NULL");
  *out_text = nullptr;
  return guarded([&] { *out_text = copy_string(thzmec::scenario_to_json_text(scenario->value)); });
}

thzmec_status thzmec_scenario_counts(const thzmec_scenario* scenario, uint32_t* iots,
                                     uint32_t* mecs, uint32_t* uavs, uint32_t* subbands) {
  if (!scenario) return invalid("thzmec_scenario_counts: scenario is NULL");
  if (iots) *iots = static_cast<uint32_t>(scenario->value.num_iots());
  if (mecs) *mecs = static_cast<uint32_t>(scenario->value.num_mecs());
  if (uavs) *uavs = static_cast<uint32_t>(scenario->value.num_uavs());
  if (subbands) *subbands = static_cast<uint32_t>(scenario->value.num_subbands());
  return THZMEC_OK;
}

void thzmec_scenario_free(thzmec_scenario* scenario) { delete scenario; }

thzmec_status thzmec_run(const thzmec_scenario* scenario, const char* algorithm,
                         const char* options_json, uint64_t seed, thzmec_report** out) {
  if (!scenario) return invalid("thzmec_run: scenario is NULL");
  if (!algorithm) return invalid("thzmec_run: algorithm is NULL");
  if (!out) return invalid("thzmec_run: out is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new thzmec_report{dispatch_run(scenario->value, algorithm,
                                          options_json ? options_json : "", seed)};
  });
}

thzmec_status thzmec_report_to_json(const thzmec_report* report, char** out_text) {
  if (!report) return invalid("thzmec_report_to_json: report is NULL");
  if (!out_text) return invalid("thzmec_report_to_json: out_text is NULL");
  *out_text = nullptr;
  return guarded([&] { *out_text = copy_string(thzmec::report_to_json_text(report->value)); });
}

thzmec_status thzmec_report_metric(const thzmec_report* report, const char* metric,
                                   double* out) {
  if (!report) return invalid("thzmec_report_metric: report is NULL");
  if (!metric) return invalid("thzmec_report_metric: metric is NULL");
  if (!out) return invalid("thzmec_report_metric: out is NULL");
  const std::string name = metric;
  const thzmec::RunReport& r = report->value;
  if (name == "mean_delay") {
    *out = r.rounded.mean_service;
  } else if (name == "comm_delay") {
    *out = r.rounded.mean_comm;
  } else if (name == "comp_delay") {
    *out = r.rounded.mean_comp;
  } else if (name == "mean_delay_upper") {
    *out = r.rounded.mean_service_upper;
  } else if (name == "relaxed_mean_delay") {
    *out = r.relaxed.mean_service;
  } else if (name == "violation") {
    *out = r.final_violation;
  } else if (name == "wall_time") {
    *out = r.wall_time_s;
  } else {
    g_last_error = "unknown metric '" + name + "'";
    return THZMEC_ERR_INVALID_ARGUMENT;
  }
  return THZMEC_OK;
}

int thzmec_report_converged(const thzmec_report* report) {
  return report && report->value.converged ? 1 : 0;
}

void thzmec_report_free(thzmec_report* report) { delete report; }

thzmec_status thzmec_erlang_c(uint32_t servers, double rho, double* out) {
  if (!out) return invalid("thzmec_erlang_c: out is NULL");
  return guarded([&] { *out = thzmec::erlang_c(static_cast<int>(servers), rho); });
}

thzmec_status thzmec_operation_delay(uint32_t servers, double mu, double lambda, double* out) {
  if (!out) return invalid("thzmec_operation_delay: out is NULL");
  return guarded([&] { *out = thzmec::operation_delay(static_cast<int>(servers), mu, lambda); });
}

thzmec_status thzmec_operation_delay_upper(uint32_t servers, double mu, double lambda,
                                           double* out) {
  if (!out) return invalid("thzmec_operation_delay_upper: out is NULL");
  return guarded(
      [&] { *out = thzmec::operation_delay_upper(static_cast<int>(servers), mu, lambda); });
}

}  // extern "C"

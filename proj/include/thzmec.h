/* C API of the THz multi-UAV MEC delay-minimization library.
 *
 * All functions return a thzmec_status; THZMEC_OK means success. On failure
 * thzmec_last_error() returns a thread-local description of what went wrong.
 * Objects are opaque handles created and released through these functions;
 * strings returned through char** out-parameters are released with
 * thzmec_string_free().
 */
#ifndef THZMEC_H
#define THZMEC_H

#include <stdint.h>

#if defined(_WIN32)
#  ifdef THZMEC_BUILD_SHARED
#    define THZMEC_API __declspec(dllexport)
#  else
#    define THZMEC_API __declspec(dllimport)
#  endif
#else
#  define THZMEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum thzmec_status {
  THZMEC_OK = 0,
  THZMEC_ERR_INVALID_ARGUMENT = 1,
  THZMEC_ERR_PARSE = 2,
  THZMEC_ERR_INFEASIBLE = 3,
  THZMEC_ERR_DOMAIN = 4,
  THZMEC_ERR_IO = 5,
  THZMEC_ERR_UNSUPPORTED = 6,
  THZMEC_ERR_REFUSED = 7,
  THZMEC_ERR_INTERNAL = 8
} thzmec_status;

typedef struct thzmec_scenario thzmec_scenario;
typedef struct thzmec_report thzmec_report;

THZMEC_API const char* thzmec_version(void);
THZMEC_API const char* thzmec_status_name(thzmec_status status);
/* Thread-local message of the most recent failure; empty string if none. */
THZMEC_API const char* thzmec_last_error(void);
THZMEC_API void thzmec_string_free(char* text);

/* --- scenarios ---------------------------------------------------------- */

/* Draws a random topology from a generator-config JSON document (the
 * data/table1.json format). Pass NULL or "" for the built-in Table-I set. */
THZMEC_API thzmec_status thzmec_scenario_generate(const char* config_json, uint64_t seed,
                                                  thzmec_scenario** out);
THZMEC_API thzmec_status thzmec_scenario_from_json(const char* json_text,
                                                   thzmec_scenario** out);
THZMEC_API thzmec_status thzmec_scenario_load(const char* path, thzmec_scenario** out);
THZMEC_API thzmec_status thzmec_scenario_save(const thzmec_scenario* scenario,
                                              const char* path);
THZMEC_API thzmec_status thzmec_scenario_to_json(const thzmec_scenario* scenario,
                                                 char** out_text);
THZMEC_API thzmec_status thzmec_scenario_counts(const thzmec_scenario* scenario,
                                                uint32_t* iots, uint32_t* mecs,
                                                uint32_t* uavs, uint32_t* subbands);
THZMEC_API void thzmec_scenario_free(thzmec_scenario* scenario);

/* --- algorithm runs ----------------------------------------------------- */

/* algorithm: "pdd", "uo", "uao", "nr-sca", "uo-guao", "bcd-sca", "exhaustive".
 * options_json may be NULL/""; recognised keys (all optional):
 *   eps_inner, eps_outer, n_max, m_max, shrink_c, rho_alpha, rho_z   (pdd)
 *   eps, max_sweeps                                                  (baselines)
 *   ga_population, ga_generations, ga_tournament, ga_crossover,
 *   ga_mutation, ga_elitism                                          (uo-guao)
 *   n_q1, n_q2, enum_cap                                             (exhaustive)
 */
THZMEC_API thzmec_status thzmec_run(const thzmec_scenario* scenario, const char* algorithm,
                                    const char* options_json, uint64_t seed,
                                    thzmec_report** out);

THZMEC_API thzmec_status thzmec_report_to_json(const thzmec_report* report, char** out_text);
/* metric: "mean_delay", "comm_delay", "comp_delay", "mean_delay_upper",
 * "relaxed_mean_delay", "violation", "wall_time". */
THZMEC_API thzmec_status thzmec_report_metric(const thzmec_report* report, const char* metric,
                                              double* out);
THZMEC_API int thzmec_report_converged(const thzmec_report* report);
THZMEC_API void thzmec_report_free(thzmec_report* report);

/* --- queueing helpers (bound-ratio studies) ----------------------------- */

THZMEC_API thzmec_status thzmec_erlang_c(uint32_t servers, double rho, double* out);
THZMEC_API thzmec_status thzmec_operation_delay(uint32_t servers, double mu, double lambda,
                                                double* out);
THZMEC_API thzmec_status thzmec_operation_delay_upper(uint32_t servers, double mu,
                                                      double lambda, double* out);

#ifdef __cplusplus
}
#endif

#endif /* THZMEC_H */

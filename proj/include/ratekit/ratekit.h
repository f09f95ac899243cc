/* ratekit C API.
 *
 * Opaque handles own their data and are released with the matching
 * *_free function. Every fallible call returns a ratekit_status; on failure
 * ratekit_last_error() returns a message for the calling thread that stays
 * valid until the next failing call on that thread.
 */
#ifndef RATEKIT_H
#define RATEKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(RATEKIT_BUILDING_LIBRARY)
#define RATEKIT_API __attribute__((visibility("default")))
#else
#define RATEKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ratekit_status {
  RATEKIT_OK = 0,
  RATEKIT_E_NONMONOTONE_RATES = 1,
  RATEKIT_E_NONPOSITIVE_RATE = 2,
  RATEKIT_E_ALPHA_OUT_OF_RANGE = 3,
  RATEKIT_E_LENGTH_MISMATCH = 4,
  RATEKIT_E_BAD_THRESHOLD = 5,
  RATEKIT_E_THRESHOLD_OVERFLOW = 6,
  RATEKIT_E_BAD_TRAFFIC = 7,
  RATEKIT_E_BAD_DURATION = 8,
  RATEKIT_E_CW_MAX_TOO_SMALL = 9,
  RATEKIT_E_PARSE = 10,
  RATEKIT_E_UNSUPPORTED = 11,
  RATEKIT_E_NUMERIC = 12,
  RATEKIT_E_INVALID_ARGUMENT = 13,
  RATEKIT_E_IO = 14,
  RATEKIT_E_INTERNAL = 15
} ratekit_status;

typedef enum ratekit_position {
  RATEKIT_POSITION_LOWEST = 0,
  RATEKIT_POSITION_INTERIOR = 1,
  RATEKIT_POSITION_HIGHEST = 2
} ratekit_position;

typedef enum ratekit_format { RATEKIT_FORMAT_CSV = 0, RATEKIT_FORMAT_DAT = 1 } ratekit_format;

typedef struct ratekit_scenario ratekit_scenario;
typedef struct ratekit_issues ratekit_issues;
typedef struct ratekit_report ratekit_report;
typedef struct ratekit_sim_result ratekit_sim_result;
typedef struct ratekit_sweep ratekit_sweep;
typedef struct ratekit_table ratekit_table;

RATEKIT_API const char* ratekit_last_error(void);
RATEKIT_API const char* ratekit_status_name(ratekit_status status);
RATEKIT_API const char* ratekit_version(void);

/* Strings returned through char** out-parameters are released with this. */
RATEKIT_API void ratekit_string_free(char* text);

/* ---- scenarios ---------------------------------------------------------- */

/* Parses a scenario document. Only JSON syntax and field types are checked;
 * use ratekit_scenario_check for the model invariants. */
RATEKIT_API ratekit_status ratekit_scenario_parse(const char* json_text, ratekit_scenario** out);
RATEKIT_API ratekit_status ratekit_scenario_load(const char* path, ratekit_scenario** out);
RATEKIT_API void ratekit_scenario_free(ratekit_scenario* scenario);
RATEKIT_API ratekit_status ratekit_scenario_to_json(const ratekit_scenario* scenario, char** out);
RATEKIT_API size_t ratekit_scenario_num_rates(const ratekit_scenario* scenario);

/* Collects every invariant violation. RATEKIT_OK only if none were found;
 * otherwise the status of the first issue. *out is always set on return
 * unless an argument is NULL. */
RATEKIT_API ratekit_status ratekit_scenario_check(const ratekit_scenario* scenario, ratekit_issues** out);
RATEKIT_API size_t ratekit_issues_count(const ratekit_issues* issues);
RATEKIT_API ratekit_status ratekit_issues_code(const ratekit_issues* issues, size_t index);
RATEKIT_API const char* ratekit_issues_message(const ratekit_issues* issues, size_t index);
RATEKIT_API void ratekit_issues_free(ratekit_issues* issues);

/* ---- closed-form analysis ------------------------------------------------ */

RATEKIT_API ratekit_status ratekit_analyze(const ratekit_scenario* scenario, ratekit_report** out);
RATEKIT_API void ratekit_report_free(ratekit_report* report);
RATEKIT_API double ratekit_report_throughput(const ratekit_report* report);
RATEKIT_API size_t ratekit_report_num_rates(const ratekit_report* report);
/* Copies min(n, num_rates) time fractions into dst; returns num_rates. */
RATEKIT_API size_t ratekit_report_time_fractions(const ratekit_report* report, double* dst, size_t n);
/* Full report including per-state pi, mu and time fractions. */
RATEKIT_API ratekit_status ratekit_report_to_json(const ratekit_report* report, char** out);

RATEKIT_API ratekit_status ratekit_expected_transmissions(double alpha, int64_t s, int64_t f,
                                                          ratekit_position position, double* out);
RATEKIT_API ratekit_status ratekit_up_probability(double alpha, int64_t s, int64_t f, double* out);

/* ---- simulation ----------------------------------------------------------- */

/* warmup_packets < 0 selects the default (1% of packets). */
RATEKIT_API ratekit_status ratekit_simulate(const ratekit_scenario* scenario, uint64_t packets, uint64_t seed,
                                            int64_t warmup_packets, ratekit_sim_result** out);
RATEKIT_API void ratekit_sim_result_free(ratekit_sim_result* result);
RATEKIT_API double ratekit_sim_throughput(const ratekit_sim_result* result);
RATEKIT_API double ratekit_sim_throughput_stderr(const ratekit_sim_result* result);
RATEKIT_API size_t ratekit_sim_airtime_fractions(const ratekit_sim_result* result, double* dst, size_t n);
RATEKIT_API ratekit_status ratekit_sim_result_to_json(const ratekit_sim_result* result, char** out);

/* ---- sweeps and figure presets -------------------------------------------- */

RATEKIT_API ratekit_status ratekit_sweep_load(const char* path, ratekit_sweep** out);
RATEKIT_API ratekit_status ratekit_sweep_parse(const char* json_text, ratekit_sweep** out);
/* Presets 4..9. mean_packet_bits <= 0 selects 8000 bits. */
RATEKIT_API ratekit_status ratekit_sweep_figure(int figure, double mean_packet_bits, ratekit_sweep** out);
RATEKIT_API void ratekit_sweep_free(ratekit_sweep* sweep);
/* with_sim < 0 and packets == 0 leave the current setting unchanged. */
RATEKIT_API void ratekit_sweep_set_sim(ratekit_sweep* sweep, int with_sim, uint64_t packets);
RATEKIT_API void ratekit_sweep_set_seed(ratekit_sweep* sweep, uint64_t seed);

/* threads == 0 reads RATEKIT_THREADS (default: hardware concurrency). */
RATEKIT_API ratekit_status ratekit_sweep_run(const ratekit_sweep* sweep, size_t threads, ratekit_table** out);
RATEKIT_API void ratekit_table_free(ratekit_table* table);
/* 1 iff every grid point computed without error. */
RATEKIT_API int ratekit_table_all_ok(const ratekit_table* table);
RATEKIT_API size_t ratekit_table_num_points(const ratekit_table* table);
RATEKIT_API ratekit_status ratekit_table_emit(const ratekit_table* table, ratekit_format format, char** out);
RATEKIT_API ratekit_status ratekit_table_write(const ratekit_table* table, const char* path, ratekit_format format);

#ifdef __cplusplus
}
#endif

#endif /* RATEKIT_H */

/*
 * Copyright 2026 The rdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the rdfl market solver and experiment harness.
 *
 * Every function returning rdfl_status reports failures through the status
 * code and a thread-local message available from rdfl_last_error(). Strings
 * returned by report accessors are owned by the report and stay valid until
 * rdfl_report_destroy().
 */

#ifndef RDFL_RDFL_H_
#define RDFL_RDFL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RDFL_BUILDING_LIBRARY)
#define RDFL_API __declspec(dllexport)
#else
#define RDFL_API __declspec(dllimport)
#endif
#else
#define RDFL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rdfl_status {
  RDFL_OK = 0,
  RDFL_ERR_INVALID_ARGUMENT = 1,
  RDFL_ERR_DEGENERATE_MARKET = 2,
  RDFL_ERR_INVALID_QUALITY = 3,
  RDFL_ERR_INSUFFICIENT_PARTICIPANTS = 4,
  RDFL_ERR_NO_VIABLE_MARKET = 5,
  RDFL_ERR_TRAINING_DIVERGENCE = 6,
  RDFL_ERR_CONFIG = 7,
  RDFL_ERR_IO = 8,
  RDFL_ERR_INTERNAL = 9
} rdfl_status;

typedef struct rdfl_config rdfl_config;
typedef struct rdfl_report rdfl_report;

typedef struct rdfl_market_params {
  double lambda;
  double rho;
  double epsilon;
  double alpha;
  double xi;
} rdfl_market_params;

RDFL_API const char* rdfl_version(void);
RDFL_API const char* rdfl_status_string(rdfl_status status);
/* Message of the last failed call on this thread; "" if none. */
RDFL_API const char* rdfl_last_error(void);

/* ---- Configuration ---------------------------------------------------- */

RDFL_API rdfl_status rdfl_config_create(rdfl_config** out);
RDFL_API void rdfl_config_destroy(rdfl_config* config);
/* Applies a whole `key = value` document on top of the current values. */
RDFL_API rdfl_status rdfl_config_parse(rdfl_config* config, const char* text);
RDFL_API rdfl_status rdfl_config_load_file(rdfl_config* config,
                                           const char* path);
RDFL_API rdfl_status rdfl_config_set(rdfl_config* config, const char* key,
                                     const char* value);
RDFL_API rdfl_status rdfl_config_validate(const rdfl_config* config);
/* 16 hex digits plus the terminator. */
RDFL_API rdfl_status rdfl_config_hash(const rdfl_config* config,
                                      char out[17]);

/* ---- Commands ----------------------------------------------------------- */

RDFL_API size_t rdfl_command_count(void);
RDFL_API const char* rdfl_command_name(size_t index);

/* Runs one command (solve, match, simulate, sweep-eta, sweep-owner, deviate,
 * compare, ablate). On success *out receives a report to destroy. */
RDFL_API rdfl_status rdfl_run(const rdfl_config* config, const char* command,
                              rdfl_report** out);
RDFL_API void rdfl_report_destroy(rdfl_report* report);
RDFL_API const char* rdfl_report_summary(const rdfl_report* report);
RDFL_API size_t rdfl_report_table_count(const rdfl_report* report);
RDFL_API const char* rdfl_report_table_name(const rdfl_report* report,
                                            size_t index);
RDFL_API const char* rdfl_report_table_csv(const rdfl_report* report,
                                           size_t index);
RDFL_API size_t rdfl_report_chart_count(const rdfl_report* report);
RDFL_API const char* rdfl_report_chart_name(const rdfl_report* report,
                                            size_t index);
RDFL_API const char* rdfl_report_chart_svg(const rdfl_report* report,
                                           size_t index);

/* ---- Direct numeric entry points ---------------------------------------- */

RDFL_API void rdfl_market_params_default(rdfl_market_params* params);

/* max(0, alpha - 1 / sum T_n) over exactly the given qualities. */
RDFL_API rdfl_status rdfl_optimal_payment(const double* quality, size_t n,
                                          const rdfl_market_params* params,
                                          double* eta);

/* Equilibrium with pruning. q and x have n entries (0 for dropped owners),
 * d has m entries. max_gain may be NULL; otherwise it receives the largest
 * unilateral-deviation gain found by the grid verifier. */
RDFL_API rdfl_status rdfl_solve_sne(const double* quality, size_t n,
                                    const double* sigma, size_t m,
                                    const rdfl_market_params* params,
                                    double* eta, double* q, double* x,
                                    double* d, double* u_server,
                                    double* max_gain);

/* Owner-proposing deferred acceptance on x (n owners) and sigma, d (m
 * centers). owner_center[k] receives the zero-based center of owner k or -1.
 * blocking_pairs may be NULL. */
RDFL_API rdfl_status rdfl_match(const double* x, size_t n, const double* sigma,
                                const double* d, size_t m,
                                int64_t* owner_center, size_t* blocking_pairs);

#ifdef __cplusplus
}
#endif

#endif /* RDFL_RDFL_H_ */

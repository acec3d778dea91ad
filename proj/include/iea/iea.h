/*
 * Copyright 2026 The iea-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the iea-sim core. All strings are UTF-8. Strings returned
 * through `char**` out-parameters are owned by the caller and released with
 * iea_string_free. Functions report failure through iea_status; the message
 * for the most recent failure on the calling thread is iea_last_error(). */

#ifndef IEA_IEA_H
#define IEA_IEA_H

#include <stddef.h>
#include <stdint.h>

#if defined(IEA_BUILDING_LIBRARY)
#define IEA_API __attribute__((visibility("default")))
#else
#define IEA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum iea_status {
  IEA_OK = 0,
  IEA_ERR_INVALID_ARGUMENT = 1, /* null handle or malformed argument */
  IEA_ERR_VALIDATION = 2,       /* scenario or input rejected */
  IEA_ERR_IO = 3,               /* file could not be read or written */
  IEA_ERR_RUNTIME = 4,          /* failure while running */
  IEA_ERR_NODE_FAILED = 5       /* distributed run finished with a failed node; logs are partial */
} iea_status;

typedef struct iea_scenario iea_scenario;
typedef struct iea_run_result iea_run_result;

typedef enum iea_mode { IEA_MODE_LOCKSTEP = 0, IEA_MODE_DISTRIBUTED = 1 } iea_mode;
typedef enum iea_node_role { IEA_ROLE_VEHICLE = 0, IEA_ROLE_MSSP = 1 } iea_node_role;

typedef struct iea_run_options {
  const char* out_dir;         /* NULL: the scenario's log directory */
  int dump_frames;             /* nonzero: write PGM frames under out_dir/frames */
  const char* node_executable; /* distributed mode: program that implements `node` */
} iea_run_options;

IEA_API const char* iea_version(void);
IEA_API const char* iea_last_error(void);
IEA_API void iea_string_free(char* s);

IEA_API iea_status iea_scenario_load_file(const char* path, iea_scenario** out);
IEA_API iea_status iea_scenario_load_json(const char* json_text, iea_scenario** out);
IEA_API void iea_scenario_destroy(iea_scenario* scenario);
IEA_API iea_status iea_scenario_set_mode(iea_scenario* scenario, iea_mode mode);
IEA_API iea_status iea_scenario_set_seed(iea_scenario* scenario, uint64_t seed);
IEA_API iea_status iea_scenario_to_json(const iea_scenario* scenario, char** out_json);

/* Runs the scenario. On IEA_ERR_NODE_FAILED *out is still set. */
IEA_API iea_status iea_run(const iea_scenario* scenario, const iea_run_options* options, iea_run_result** out);
IEA_API iea_status iea_run_result_summary_json(const iea_run_result* result, char** out_json);
IEA_API iea_status iea_run_result_out_dir(const iea_run_result* result, char** out_path);
IEA_API void iea_run_result_destroy(iea_run_result* result);

/* One node of a distributed run; blocks until done or iea_node_request_stop.
 * mssp_index is 1-based and ignored for the vehicle. epoch < 0 means start
 * one second from now. */
IEA_API iea_status iea_node_run(const iea_scenario* scenario, iea_node_role role, size_t mssp_index, double epoch,
                                const char* out_dir, int dump_frames);
/* Async-signal-safe. */
IEA_API void iea_node_request_stop(void);

IEA_API iea_status iea_compare_logs(const char* log_a, const char* log_b, char** out_json);
IEA_API iea_status iea_export_plot_data(const char* log_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* IEA_IEA_H */

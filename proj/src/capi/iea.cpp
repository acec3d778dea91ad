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

#include "iea/iea.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <string>

#include "core/error.hpp"
#include "core/harness.hpp"
#include "core/scenario.hpp"

struct iea_scenario {
  iea::scenario::ScenarioConfig cfg;
};

struct iea_run_result {
  iea::harness::RunResult result;
};

namespace {

thread_local std::string g_last_error;

iea_status fail(iea_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
iea_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const iea::ValidationError& e) {
    return fail(IEA_ERR_VALIDATION, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(IEA_ERR_IO, e.what());
  } catch (const iea::IoError& e) {
    return fail(IEA_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(IEA_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(IEA_ERR_RUNTIME, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* iea_version(void) { return "1.0.0"; }

const char* iea_last_error(void) { return g_last_error.c_str(); }

void iea_string_free(char* s) { delete[] s; }

iea_status iea_scenario_load_file(const char* path, iea_scenario** out) {
  if (path == nullptr || out == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    if (!std::filesystem::exists(path)) {
      return fail(IEA_ERR_IO, std::string("scenario file not found: ") + path);
    }
    *out = new iea_scenario{iea::scenario::load_scenario_file(path)};
    return IEA_OK;
  });
}

iea_status iea_scenario_load_json(const char* json_text, iea_scenario** out) {
  if (json_text == nullptr || out == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new iea_scenario{iea::scenario::parse_scenario(json_text)};
    return IEA_OK;
  });
}

void iea_scenario_destroy(iea_scenario* scenario) { delete scenario; }

iea_status iea_scenario_set_mode(iea_scenario* scenario, iea_mode mode) {
  if (scenario == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null scenario");
  }
  switch (mode) {
    case IEA_MODE_LOCKSTEP:
      scenario->cfg.mode = iea::scenario::Mode::Lockstep;
      return IEA_OK;
    case IEA_MODE_DISTRIBUTED:
      scenario->cfg.mode = iea::scenario::Mode::Distributed;
      return IEA_OK;
  }
  return fail(IEA_ERR_INVALID_ARGUMENT, "unknown mode");
}

iea_status iea_scenario_set_seed(iea_scenario* scenario, uint64_t seed) {
  if (scenario == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null scenario");
  }
  scenario->cfg.seed = seed;
  scenario->cfg.link.seed = seed;
  return IEA_OK;
}

iea_status iea_scenario_to_json(const iea_scenario* scenario, char** out_json) {
  if (scenario == nullptr || out_json == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out_json = dup_string(iea::scenario::to_json(scenario->cfg));
    return IEA_OK;
  });
}

iea_status iea_run(const iea_scenario* scenario, const iea_run_options* options, iea_run_result** out) {
  if (scenario == nullptr || out == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    iea::harness::RunOptions opts;
    if (options != nullptr) {
      if (options->out_dir != nullptr) {
        opts.out_dir = options->out_dir;
      }
      opts.dump_frames = options->dump_frames != 0;
      if (options->node_executable != nullptr) {
        opts.node_executable = options->node_executable;
      }
    }
    auto* result = new iea_run_result{iea::harness::run_scenario(scenario->cfg, opts)};
    *out = result;
    if (result->result.partial) {
      return fail(IEA_ERR_NODE_FAILED, result->result.failure);
    }
    return IEA_OK;
  });
}

iea_status iea_run_result_summary_json(const iea_run_result* result, char** out_json) {
  if (result == nullptr || out_json == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out_json = dup_string(result->result.summary.dump(2));
  return IEA_OK;
}

iea_status iea_run_result_out_dir(const iea_run_result* result, char** out_path) {
  if (result == nullptr || out_path == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out_path = dup_string(result->result.out_dir.string());
  return IEA_OK;
}

void iea_run_result_destroy(iea_run_result* result) { delete result; }

iea_status iea_node_run(const iea_scenario* scenario, iea_node_role role, size_t mssp_index, double epoch,
                        const char* out_dir, int dump_frames) {
  if (scenario == nullptr || out_dir == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (role != IEA_ROLE_VEHICLE && role != IEA_ROLE_MSSP) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "unknown node role");
  }
  return guarded([&] {
    const auto r = role == IEA_ROLE_VEHICLE ? iea::harness::NodeRole::Vehicle : iea::harness::NodeRole::Mssp;
    iea::harness::run_node(scenario->cfg, r, mssp_index, epoch, out_dir, dump_frames != 0);
    return IEA_OK;
  });
}

void iea_node_request_stop(void) { iea::harness::request_node_stop(); }

iea_status iea_compare_logs(const char* log_a, const char* log_b, char** out_json) {
  if (log_a == nullptr || log_b == nullptr || out_json == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto a = iea::harness::read_run_log(log_a);
    const auto b = iea::harness::read_run_log(log_b);
    *out_json = dup_string(iea::harness::to_json(iea::harness::compare_runs(a, b)).dump(2));
    return IEA_OK;
  });
}

iea_status iea_export_plot_data(const char* log_path, const char* out_dir) {
  if (log_path == nullptr || out_dir == nullptr) {
    return fail(IEA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    iea::harness::export_plot_data(iea::harness::read_run_log(log_path), out_dir);
    return IEA_OK;
  });
}

}  // extern "C"

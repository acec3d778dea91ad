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

// iea-sim: command-line front end. Talks to the simulator only through the
// C API in iea/iea.h.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iea/iea.h"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2 };

int exit_code(iea_status status) {
  switch (status) {
    case IEA_OK:
      return kOk;
    case IEA_ERR_INVALID_ARGUMENT:
    case IEA_ERR_VALIDATION:
      return kValidation;
    default:
      return kRuntime;
  }
}

int report(iea_status status) {
  if (status != IEA_OK) {
    std::cerr << "iea-sim: " << iea_last_error() << '\n';
  }
  return exit_code(status);
}

struct ScenarioDeleter {
  void operator()(iea_scenario* s) const { iea_scenario_destroy(s); }
};
struct ResultDeleter {
  void operator()(iea_run_result* r) const { iea_run_result_destroy(r); }
};
struct StringDeleter {
  void operator()(char* s) const { iea_string_free(s); }
};
using ScenarioPtr = std::unique_ptr<iea_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<iea_run_result, ResultDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

// A path, or the name of a bundled scenario ("straight_3ms").
std::string resolve_scenario(const std::string& arg) {
  if (fs::exists(arg)) {
    return arg;
  }
#ifdef IEA_SCENARIO_DIR
  for (const fs::path& candidate : {fs::path(IEA_SCENARIO_DIR) / arg, fs::path(IEA_SCENARIO_DIR) / (arg + ".json")}) {
    if (fs::exists(candidate)) {
      return candidate.string();
    }
  }
#endif
  return arg;
}

iea_status load(const std::string& arg, ScenarioPtr& out) {
  const std::string path = resolve_scenario(arg);
  if (!fs::exists(path)) {
    std::cerr << "iea-sim: no scenario file or bundled scenario named '" << arg << "'\n";
    return IEA_ERR_VALIDATION;
  }
  iea_scenario* raw = nullptr;
  const iea_status st = iea_scenario_load_file(path.c_str(), &raw);
  out.reset(raw);
  return st;
}

extern "C" void on_signal(int) { iea_node_request_stop(); }

std::string self_executable(const char* argv0) {
  std::error_code ec;
  const auto p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infrastructure-enabled autonomy simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(iea_version()));

  std::string scenario_arg;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool dump_frames = false;
  auto* run = app.add_subcommand("run", "run a scenario and write logs and a summary");
  run->add_option("--scenario", scenario_arg, "scenario file or bundled scenario name")->required();
  run->add_option("--mode", mode, "override the scenario's mode")->check(CLI::IsMember({"lockstep", "distributed"}));
  run->add_option("--seed", seed, "override the scenario's seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--dump-frames", dump_frames, "write every camera frame as PGM");

  std::string log_a;
  std::string log_b;
  auto* compare = app.add_subcommand("compare", "trajectory difference between two run logs");
  compare->add_option("A", log_a)->required();
  compare->add_option("B", log_b)->required();

  std::string export_log;
  std::string export_out;
  auto* exp = app.add_subcommand("export", "write plot-ready CSV series for a run log");
  exp->add_option("LOG", export_log)->required();
  exp->add_option("--out", export_out, "output directory (default: the log's directory)");

  std::string role;
  std::size_t node_id = 0;
  double epoch = -1.0;
  std::string node_out = ".";
  auto* node = app.add_subcommand("node", "run a single node of a distributed run");
  node->add_option("--role", role)->required()->check(CLI::IsMember({"vehicle", "mssp"}));
  node->add_option("--id", node_id, "MSSP number, 1-based");
  node->add_option("--scenario", scenario_arg)->required();
  node->add_option("--epoch", epoch, "shared start time on the monotonic clock");
  node->add_option("--out", node_out);
  node->add_flag("--dump-frames", dump_frames);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  if (*run) {
    ScenarioPtr sc;
    if (const auto st = load(scenario_arg, sc); st != IEA_OK) {
      return report(st);
    }
    if (!mode.empty()) {
      iea_scenario_set_mode(sc.get(), mode == "lockstep" ? IEA_MODE_LOCKSTEP : IEA_MODE_DISTRIBUTED);
    }
    if (seed) {
      iea_scenario_set_seed(sc.get(), *seed);
    }
    const std::string exe = self_executable(argv[0]);
    iea_run_options opts{out_dir.empty() ? nullptr : out_dir.c_str(), dump_frames ? 1 : 0, exe.c_str()};
    iea_run_result* raw = nullptr;
    const iea_status st = iea_run(sc.get(), &opts, &raw);
    ResultPtr result(raw);
    if (result) {
      char* summary = nullptr;
      char* dir = nullptr;
      iea_run_result_summary_json(result.get(), &summary);
      iea_run_result_out_dir(result.get(), &dir);
      StringPtr s(summary);
      StringPtr d(dir);
      std::cout << s.get() << '\n';
      std::cerr << "outputs in " << d.get() << '\n';
    }
    return report(st);
  }

  if (*compare) {
    char* json = nullptr;
    const iea_status st = iea_compare_logs(log_a.c_str(), log_b.c_str(), &json);
    StringPtr j(json);
    if (st == IEA_OK) {
      std::cout << j.get() << '\n';
    }
    return report(st);
  }

  if (*exp) {
    if (export_out.empty()) {
      export_out = fs::absolute(export_log).parent_path().string();
    }
    const iea_status st = iea_export_plot_data(export_log.c_str(), export_out.c_str());
    if (st == IEA_OK) {
      std::cerr << "wrote truth_vs_estimates.csv and closed_loop.csv to " << export_out << '\n';
    }
    return report(st);
  }

  if (*node) {
    ScenarioPtr sc;
    if (const auto st = load(scenario_arg, sc); st != IEA_OK) {
      return report(st);
    }
    std::signal(SIGTERM, on_signal);
    std::signal(SIGINT, on_signal);
    const auto r = role == "vehicle" ? IEA_ROLE_VEHICLE : IEA_ROLE_MSSP;
    return report(iea_node_run(sc.get(), r, node_id, epoch, node_out.c_str(), dump_frames ? 1 : 0));
  }
  return kValidation;
}

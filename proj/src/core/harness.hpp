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

// Experiment orchestration: lockstep and multi-process runs, per-node
// process loops, run comparison and plot-data export.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/runlog.hpp"
#include "core/scenario.hpp"

namespace iea::harness {

struct RunOptions {
  std::filesystem::path out_dir;  // empty = cfg.log.dir
  bool dump_frames{false};
  std::string node_executable;  // distributed mode: binary providing `node`
};

struct RunResult {
  std::filesystem::path out_dir;
  RunLog log;
  std::vector<netbus::LatencySample> latency;
  nlohmann::json summary;
  bool partial{false};  // a node process failed; logs are whatever was written
  std::string failure;
};

/// Runs to the Stopped phase (vehicle at rest), path completion or the
/// duration cap, and writes run_log.csv, latency.csv, net_rates.csv,
/// summary.json and the resolved scenario.json under the output directory.
RunResult run_scenario(const scenario::ScenarioConfig& cfg, const RunOptions& options);

RunResult run_lockstep(const scenario::ScenarioConfig& cfg, const RunOptions& options);
RunResult run_distributed(const scenario::ScenarioConfig& cfg, const RunOptions& options);

enum class NodeRole { Vehicle, Mssp };

/// Real-time loop for one node of a distributed run. `mssp_index` is 1-based;
/// `epoch` is the shared start instant on the monotonic clock (negative:
/// one second from now). Returns when the node is done or a stop was
/// requested.
void run_node(const scenario::ScenarioConfig& cfg, NodeRole role, std::size_t mssp_index, double epoch,
              const std::filesystem::path& out_dir, bool dump_frames);

/// Async-signal-safe.
void request_node_stop();

double monotonic_seconds();

struct CompareReport {
  std::size_t samples{0};
  double t_begin{0.0};
  double t_end{0.0};
  double max_diff{0.0};
  double rms_diff{0.0};
};

/// Pointwise true-position difference, b interpolated onto a's times over the
/// shared time range. Throws ValidationError on differing plans or disjoint
/// time ranges.
CompareReport compare_runs(const RunLog& a, const RunLog& b);
nlohmann::json to_json(const CompareReport& report);

/// truth_vs_estimates.csv and closed_loop.csv.
void export_plot_data(const RunLog& log, const std::filesystem::path& out_dir);

}  // namespace iea::harness

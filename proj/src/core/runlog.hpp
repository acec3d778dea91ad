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

// Run log CSV files and the summary statistics derived from them.
//
// Every CSV starts with a metadata comment line beginning "#schema=1",
// followed by a header row. Floats use 17 significant digits; absent values
// are empty cells.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/control.hpp"
#include "core/netbus.hpp"

namespace iea::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kSettleAfterFix = 10.0;

struct EstimateCell {
  double x{0.0};
  double y{0.0};
  double t_capture{0.0};
};

struct RunLogRow {
  double t{0.0};
  double true_x{0.0};
  double true_y{0.0};
  double true_psi{0.0};
  double true_v{0.0};
  std::optional<double> fused_x;
  std::optional<double> fused_y;
  std::vector<std::optional<EstimateCell>> estimates;  // one slot per MSSP, received this step
  double yaw_rate_cmd{0.0};
  double v_cmd{0.0};
  std::string phase;
};

struct RunLogMeta {
  std::string name;
  double dt{0.02};
  double v_cruise{0.0};
  std::vector<std::string> mssp_ids;
  std::vector<control::Point2> plan;
};

struct RunLog {
  RunLogMeta meta;
  std::vector<RunLogRow> rows;
};

std::string format_double(double v);

void write_run_log(const RunLog& log, const std::filesystem::path& path);
/// Throws ValidationError on schema or format mismatch.
RunLog read_run_log(const std::filesystem::path& path);

void write_latency_csv(const std::vector<netbus::LatencySample>& samples, const std::filesystem::path& path);
std::vector<netbus::LatencySample> read_latency_csv(const std::filesystem::path& path);

/// Packet and byte rates per link over consecutive windows (Figs. 10-11
/// style time series).
void write_net_rates(const std::vector<netbus::LatencySample>& samples, double t_end, double window,
                     const std::filesystem::path& path);

/// Linear interpolation of the true position at time t (clamped to the
/// logged range).
control::Point2 truth_at(const RunLog& log, double t);

/// Everything here is a function of the CSV contents alone.
nlohmann::json summarize(const RunLog& log, const std::vector<netbus::LatencySample>& latency);

}  // namespace iea::harness

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

// Scenario configuration: one JSON document per experiment.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/control.hpp"
#include "core/dynamics.hpp"
#include "core/geometry.hpp"
#include "core/netbus.hpp"
#include "core/vision.hpp"

namespace iea::scenario {

enum class Mode { Lockstep, Distributed };

/// Where MSSP nodes get their position from: the vision pipeline, or the
/// received true pose whenever the vehicle is fully in view (perfect-
/// perception baseline).
enum class PositionSource { Vision, Truth };

struct CameraSpec {
  std::string id;
  geometry::CameraModel model;
};

struct LogPaths {
  std::string dir{"out"};
  std::string run_log{"run_log.csv"};
  std::string summary{"summary.json"};
};

struct NetworkConfig {
  std::string host{"127.0.0.1"};
  std::uint16_t base_port{47800};
  std::map<std::string, std::string> hosts;  // per-node override
};

struct ScenarioConfig {
  std::string name{"scenario"};
  Mode mode{Mode::Lockstep};
  std::uint64_t seed{1};
  double duration_cap{120.0};
  double dt{0.02};
  double frame_rate{20.0};

  std::vector<CameraSpec> cameras;
  double camera_spacing{0.0};  // 0 = not checked

  std::vector<control::Point2> waypoints;
  double interp_spacing{1.0};
  double lookahead_m{10.0};
  double v_cruise{3.0};
  control::ControllerParams controller;

  netbus::LinkConfig link;

  vision::VehicleDims vehicle_dims;
  geometry::Pose2D initial_pose;
  double initial_speed{0.0};
  dynamics::DynamicsParams dynamics;

  vision::TrackerParams tracker;
  double noise_sigma{0.0};

  double staleness_timeout{0.25};
  double stop_grace{2.0};

  PositionSource position_source{PositionSource::Vision};
  NetworkConfig network;
  LogPaths log;

  control::WaypointPlan plan() const { return {waypoints, interp_spacing, lookahead_m}; }
  control::ControllerParams controller_params() const;
  std::string host_for(const std::string& node_id) const;
  std::uint16_t port_for(std::size_t mssp_index) const;  // 0 = vehicle, i = i-th MSSP (1-based)
};

/// Throws ValidationError on malformed JSON, unknown keys, or any violated
/// invariant.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string to_json(const ScenarioConfig& cfg);

void validate(const ScenarioConfig& cfg);

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

}  // namespace iea::scenario

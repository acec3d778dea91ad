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

// MSSP and vehicle node state machines. Both are advanced by their driver
// (lockstep scheduler or real-time process loop) with whatever the
// transport delivered since the previous call.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "core/control.hpp"
#include "core/dynamics.hpp"
#include "core/fusion.hpp"
#include "core/netbus.hpp"
#include "core/scenario.hpp"
#include "core/vision.hpp"

namespace iea::nodes {

inline const std::string kVehicleId = "veh";

/// Ground footprint of one camera along the corridor centreline (y = 0).
struct Cell {
  std::string mssp_id;
  double x_near{0.0};
  double x_far{0.0};
};

using CellLayout = std::vector<Cell>;

/// Throws ValidationError if a camera does not see the road on both image
/// edges or consecutive footprints fail to overlap.
CellLayout compute_cell_layout(const std::vector<scenario::CameraSpec>& cameras);

/// Every vehicle corner projects at least one pixel inside the image border.
bool fully_in_view(const geometry::CameraModel& camera, const geometry::Pose2D& pose, const vision::VehicleDims& dims);

// ---------------------------------------------------------------------------

struct MsspNode {
  std::string id;
  geometry::CameraModel camera;
  vision::VehicleDims dims;
  vision::TrackerParams tracker_params;
  vision::TrackerState tracker;
  std::optional<netbus::PosePayload> last_pose;
  double frame_period{0.05};
  std::uint64_t frame_index{0};  // next capture at frame_index * frame_period
  std::uint64_t seq{0};
  scenario::PositionSource source{scenario::PositionSource::Vision};
  double noise_sigma{0.0};
  std::mt19937_64 rng;

  double next_capture() const { return static_cast<double>(frame_index) * frame_period; }
};

MsspNode make_mssp_node(const scenario::ScenarioConfig& cfg, std::size_t index);

struct MsspStepOutput {
  std::vector<netbus::WireMessage> estimates;
  std::optional<vision::Detection> detection;
  std::optional<vision::Frame> frame;  // only when requested
  bool captured{false};
};

/// Absorbs received poses, then captures at most one frame if a capture is
/// due. Estimates leave only while the tracker is in Tracking mode (or, for
/// the truth source, while the vehicle is fully in view).
MsspStepOutput mssp_step(MsspNode& node, double now, std::span<const netbus::Received> inbox, bool keep_frame = false);

// ---------------------------------------------------------------------------

enum class Phase { WaitingForFirstFix, Driving, Stopped };

std::string to_string(Phase phase);

/// The vehicle's decision computer. It sees MSSP estimates and the IMU
/// heading; it has no access to the simulated vehicle's true position.
struct SmartConnect {
  std::vector<control::Point2> path;
  control::WaypointPlan plan;
  control::ControllerParams params;
  control::ControllerState cstate;
  fusion::FusionState fstate;
  Phase phase{Phase::WaitingForFirstFix};
  std::string last_cell_id;
  bool seen_last_cell{false};
  double last_estimate_time{0.0};
  double stop_grace{2.0};
  dynamics::DbwCommand last_cmd;
};

struct SmartConnectOutput {
  dynamics::DbwCommand command;
  std::optional<fusion::FusedFix> fused;
};

SmartConnectOutput smartconnect_step(SmartConnect& brain, double now,
                                     std::span<const fusion::PositionEstimate> estimates, double imu_heading);

struct VehicleNode {
  std::string id{kVehicleId};
  dynamics::VehicleState plant;
  dynamics::DynamicsParams dynamics;
  double dt{0.02};
  SmartConnect brain;
  std::uint64_t seq{0};
};

VehicleNode make_vehicle_node(const scenario::ScenarioConfig& cfg);

struct VehicleStepOutput {
  dynamics::VehicleState truth;  // state at `now`, before the step
  netbus::WireMessage pose;
  dynamics::DbwCommand command;
  std::optional<fusion::FusedFix> fused;
  std::vector<fusion::PositionEstimate> received;
  Phase phase{Phase::WaitingForFirstFix};
};

/// Broadcast pose for `now`, decide a command from the estimates, then
/// advance the plant by dt.
VehicleStepOutput vehicle_step(VehicleNode& node, double now, std::span<const netbus::Received> inbox);

}  // namespace iea::nodes

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

#include "core/nodes.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace iea::nodes {

CellLayout compute_cell_layout(const std::vector<scenario::CameraSpec>& cameras) {
  CellLayout layout;
  for (const auto& cam : cameras) {
    const auto& m = cam.model;
    const auto top = geometry::back_project_ground(m, {m.cx, 0.0});
    const auto bottom = geometry::back_project_ground(m, {m.cx, m.height - 1.0});
    if (!top || !bottom) {
      throw ValidationError("camera '" + cam.id + "' does not see the road across its full image height");
    }
    layout.push_back({cam.id, std::min(top->x, bottom->x), std::max(top->x, bottom->x)});
  }
  for (std::size_t i = 1; i < layout.size(); ++i) {
    const double overlap = layout[i - 1].x_far - layout[i].x_near;
    if (!(overlap > 0.0)) {
      throw ValidationError("footprints of '" + layout[i - 1].mssp_id + "' and '" + layout[i].mssp_id +
                            "' do not overlap");
    }
  }
  return layout;
}

bool fully_in_view(const geometry::CameraModel& camera, const geometry::Pose2D& pose, const vision::VehicleDims& dims) {
  for (const auto& corner : vision::vehicle_corners(pose, dims)) {
    const auto px = geometry::project(camera, corner);
    if (!px || px->u < 1.0 || px->v < 1.0 || px->u > camera.width - 2.0 || px->v > camera.height - 2.0) {
      return false;
    }
  }
  return true;
}

MsspNode make_mssp_node(const scenario::ScenarioConfig& cfg, std::size_t index) {
  const auto& cam = cfg.cameras.at(index);
  MsspNode node;
  node.id = cam.id;
  node.camera = cam.model;
  node.dims = cfg.vehicle_dims;
  node.tracker_params = cfg.tracker;
  node.frame_period = 1.0 / cfg.frame_rate;
  node.source = cfg.position_source;
  node.noise_sigma = cfg.noise_sigma;
  node.rng.seed(cfg.seed + 0x9E3779B97F4A7C15ULL * (index + 1));
  return node;
}

MsspStepOutput mssp_step(MsspNode& node, double now, std::span<const netbus::Received> inbox, bool keep_frame) {
  for (const auto& r : inbox) {
    if (const auto* pose = std::get_if<netbus::PosePayload>(&r.msg.payload)) {
      node.last_pose = *pose;
    }
  }

  MsspStepOutput out;
  constexpr double kEps = 1e-9;
  if (now + kEps < node.next_capture()) {
    return out;
  }
  const double t_frame = node.next_capture();
  node.frame_index = static_cast<std::uint64_t>(std::floor((now + kEps) / node.frame_period)) + 1;
  out.captured = true;

  std::optional<geometry::Pose2D> pose;
  if (node.last_pose) {
    pose = geometry::Pose2D{node.last_pose->x, node.last_pose->y, node.last_pose->psi};
  }

  auto emit = [&](double x, double y) {
    out.estimates.push_back({node.id, ++node.seq, now, netbus::EstimatePayload{node.id, x, y, t_frame}});
  };

  if (node.source == scenario::PositionSource::Truth) {
    if (pose && fully_in_view(node.camera, *pose, node.dims)) {
      emit(pose->x, pose->y);
    }
    return out;
  }

  vision::Frame frame;
  if (pose) {
    frame = vision::render_frame(node.camera, *pose, node.dims, t_frame);
  } else {
    frame = vision::Frame{node.camera.width, node.camera.height,
                          std::vector<std::uint8_t>(static_cast<std::size_t>(node.camera.width) * node.camera.height,
                                                    vision::kBackgroundIntensity),
                          t_frame};
  }
  vision::add_pixel_noise(frame, node.noise_sigma, node.rng);

  out.detection = vision::track_step(node.tracker, frame, node.tracker_params);
  if (out.detection && node.tracker.mode == vision::TrackerMode::Tracking) {
    if (const auto ground = geometry::back_project_ground(node.camera, out.detection->center)) {
      emit(ground->x, ground->y);
    }
  }
  if (keep_frame) {
    out.frame = std::move(frame);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::WaitingForFirstFix:
      return "waiting";
    case Phase::Driving:
      return "driving";
    case Phase::Stopped:
      return "stopped";
  }
  return "unknown";
}

SmartConnectOutput smartconnect_step(SmartConnect& brain, double now,
                                     std::span<const fusion::PositionEstimate> estimates, double imu_heading) {
  for (const auto& est : estimates) {
    if (fusion::ingest(brain.fstate, est)) {
      brain.last_estimate_time = now;
      brain.seen_last_cell = brain.seen_last_cell || est.mssp_id == brain.last_cell_id;
    }
  }
  SmartConnectOutput out;
  out.fused = fusion::fuse(brain.fstate, now);

  if (brain.phase == Phase::WaitingForFirstFix) {
    if (out.fused) {
      brain.phase = Phase::Driving;
    } else {
      brain.last_cmd = {brain.params.v_cruise, 0.0};
    }
  }

  if (brain.phase == Phase::Driving) {
    if (out.fused) {
      const geometry::Pose2D estimated{out.fused->x, out.fused->y, imu_heading};
      const auto sel = control::select_target(brain.path, brain.cstate, estimated, brain.plan.lookahead_m);
      brain.cstate = sel.state;
      if (sel.state.path_complete) {
        brain.phase = Phase::Stopped;
      } else {
        const auto hc = control::heading_control(estimated, sel.target, brain.params, brain.cstate);
        brain.cstate = hc.state;
        brain.last_cmd = hc.command;
      }
    } else if (brain.seen_last_cell && now - brain.last_estimate_time > brain.stop_grace) {
      brain.phase = Phase::Stopped;
    }
  }

  if (brain.phase == Phase::Stopped) {
    brain.last_cmd = {0.0, 0.0};
  }
  out.command = brain.last_cmd;
  return out;
}

VehicleNode make_vehicle_node(const scenario::ScenarioConfig& cfg) {
  VehicleNode node;
  node.plant.pose = cfg.initial_pose;
  node.plant.v = cfg.initial_speed;
  node.dynamics = cfg.dynamics;
  node.dt = cfg.dt;
  auto& b = node.brain;
  b.plan = cfg.plan();
  b.path = control::interpolate_path(b.plan);
  b.params = cfg.controller_params();
  b.fstate.staleness_timeout = cfg.staleness_timeout;
  b.stop_grace = cfg.stop_grace;
  b.last_cell_id = cfg.cameras.back().id;
  b.last_cmd = {b.params.v_cruise, 0.0};
  return node;
}

VehicleStepOutput vehicle_step(VehicleNode& node, double now, std::span<const netbus::Received> inbox) {
  VehicleStepOutput out;
  out.truth = node.plant;
  out.truth.t = now;
  const auto& p = node.plant;
  out.pose = {node.id, ++node.seq, now, netbus::PosePayload{p.pose.x, p.pose.y, p.pose.psi, p.v}};

  for (const auto& r : inbox) {
    if (const auto* est = std::get_if<netbus::EstimatePayload>(&r.msg.payload)) {
      out.received.push_back({est->mssp_id, est->x, est->y, est->t_capture, r.t_received, r.msg.seq});
    }
  }

  const auto decision = smartconnect_step(node.brain, now, out.received, node.plant.pose.psi);
  out.command = decision.command;
  out.fused = decision.fused;
  out.phase = node.brain.phase;

  node.plant = dynamics::step(node.plant, out.command, node.dt, node.dynamics);
  node.plant.t = now + node.dt;
  return out;
}

}  // namespace iea::nodes

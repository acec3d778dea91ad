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

// Lookahead target selection and the proportional heading controller
// (gain -> saturation -> first-order smoothing).

#pragma once

#include <cstddef>
#include <vector>

#include "core/dynamics.hpp"
#include "core/geometry.hpp"

namespace iea::control {

struct Point2 {
  double x{0.0};
  double y{0.0};
  bool operator==(const Point2&) const = default;
};

struct WaypointPlan {
  std::vector<Point2> waypoints;
  double interp_spacing{1.0};
  double lookahead_m{10.0};
};

struct ControllerParams {
  double kp{1.0};
  double u_max{0.5};
  double alpha{0.2};
  double v_cruise{3.0};
};

struct ControllerState {
  double y_prev{0.0};
  std::size_t target_index{0};
  bool path_complete{false};
};

/// Throws ValidationError if the plan has < 2 waypoints, coincident
/// neighbours, or non-positive spacing / lookahead.
void validate_plan(const WaypointPlan& plan);
void validate_params(const ControllerParams& params);

/// Each segment split into ceil(length / spacing) equal pieces. All original
/// waypoints are kept, in order, without duplicates.
std::vector<Point2> interpolate_path(const WaypointPlan& plan);

struct TargetSelection {
  Point2 target;
  ControllerState state;
};

/// Anchors at the path point nearest the vehicle at or after
/// state.target_index, then takes the first point from there that is at
/// least lookahead_m away. Falls back to the final point with path_complete.
TargetSelection select_target(const std::vector<Point2>& path, const ControllerState& state,
                              const geometry::Pose2D& pose, double lookahead_m);

/// y = alpha * u + (1 - alpha) * y_prev
double filter_step(double y_prev, double u_new, double alpha);

struct HeadingOutput {
  dynamics::DbwCommand command;
  ControllerState state;
  double heading_error{0.0};
  bool held{false};  // target coincided with the vehicle; previous command reissued
};

HeadingOutput heading_control(const geometry::Pose2D& pose, const Point2& target, const ControllerParams& params,
                              const ControllerState& state);

/// Perpendicular distance from p to the polyline.
double cross_track_distance(const std::vector<Point2>& polyline, const Point2& p);

}  // namespace iea::control

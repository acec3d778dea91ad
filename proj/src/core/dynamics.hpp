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

// Planar kinematic vehicle with a drive-by-wire speed / yaw-rate interface.

#pragma once

#include "core/geometry.hpp"

namespace iea::dynamics {

struct VehicleState {
  geometry::Pose2D pose;
  double v{0.0};         // forward speed, m/s
  double yaw_rate{0.0};  // realized, rad/s
  double t{0.0};
};

struct DbwCommand {
  double v_cmd{0.0};
  double yaw_rate_cmd{0.0};
};

struct DynamicsParams {
  double tau_v{0.5};      // s; 0 disables the speed lag
  double tau_omega{0.2};  // s; 0 disables the yaw-rate lag
  double yaw_rate_limit{1.0};
};

inline constexpr double kMaxStep = 0.1;

/// First-order actuator lag on both channels, then an exact constant-rate
/// arc over dt. Throws ValidationError unless 0 < dt <= kMaxStep.
VehicleState step(const VehicleState& state, const DbwCommand& cmd, double dt, const DynamicsParams& params = {});

}  // namespace iea::dynamics

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

#include "core/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace iea::dynamics {

namespace {

double lag(double current, double target, double dt, double tau) {
  const double gain = tau > 0.0 ? std::min(1.0, dt / tau) : 1.0;
  return current + (target - current) * gain;
}

}  // namespace

VehicleState step(const VehicleState& state, const DbwCommand& cmd, double dt, const DynamicsParams& params) {
  if (!(dt > 0.0 && dt <= kMaxStep)) {
    throw ValidationError("dynamics step dt must be in (0, 0.1]");
  }
  if (!std::isfinite(cmd.v_cmd) || !std::isfinite(cmd.yaw_rate_cmd)) {
    throw ValidationError("drive-by-wire command must be finite");
  }
  const double omega_cmd = std::clamp(cmd.yaw_rate_cmd, -params.yaw_rate_limit, params.yaw_rate_limit);

  VehicleState next = state;
  next.v = std::max(0.0, lag(state.v, std::max(0.0, cmd.v_cmd), dt, params.tau_v));
  next.yaw_rate = lag(state.yaw_rate, omega_cmd, dt, params.tau_omega);

  const double psi = state.pose.psi;
  const double w = next.yaw_rate;
  if (std::abs(w) < 1e-9) {
    next.pose.x += next.v * dt * std::cos(psi);
    next.pose.y += next.v * dt * std::sin(psi);
  } else {
    const double radius = next.v / w;
    next.pose.x += radius * (std::sin(psi + w * dt) - std::sin(psi));
    next.pose.y -= radius * (std::cos(psi + w * dt) - std::cos(psi));
  }
  next.pose.psi = geometry::wrap_angle(psi + w * dt);
  next.t = state.t + dt;
  return next;
}

}  // namespace iea::dynamics

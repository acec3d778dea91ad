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

#include "core/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace iea::control {

void validate_plan(const WaypointPlan& plan) {
  if (plan.waypoints.size() < 2) {
    throw ValidationError("waypoint plan needs at least two waypoints");
  }
  if (!(plan.interp_spacing > 0.0) || !(plan.lookahead_m > 0.0)) {
    throw ValidationError("interp_spacing and lookahead_m must be positive");
  }
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const auto& w = plan.waypoints[i];
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) {
      throw ValidationError("waypoints must be finite");
    }
    if (i > 0 && w == plan.waypoints[i - 1]) {
      throw ValidationError("consecutive waypoints coincide");
    }
  }
}

void validate_params(const ControllerParams& params) {
  if (!(params.kp > 0.0) || !(params.u_max > 0.0) || !(params.v_cruise > 0.0)) {
    throw ValidationError("kp, u_max and v_cruise must be positive");
  }
  if (!(params.alpha > 0.0 && params.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0, 1]");
  }
}

std::vector<Point2> interpolate_path(const WaypointPlan& plan) {
  validate_plan(plan);
  std::vector<Point2> out{plan.waypoints.front()};
  for (std::size_t i = 1; i < plan.waypoints.size(); ++i) {
    const Point2 a = plan.waypoints[i - 1];
    const Point2 b = plan.waypoints[i];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / plan.interp_spacing - 1e-9)));
    for (std::size_t k = 1; k < pieces; ++k) {
      const double f = static_cast<double>(k) / static_cast<double>(pieces);
      out.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
    }
    out.push_back(b);
  }
  return out;
}

TargetSelection select_target(const std::vector<Point2>& path, const ControllerState& state,
                              const geometry::Pose2D& pose, double lookahead_m) {
  if (path.empty()) {
    throw ValidationError("empty path");
  }
  auto dist = [&pose](const Point2& p) { return std::hypot(p.x - pose.x, p.y - pose.y); };

  ControllerState next = state;
  std::size_t anchor = std::min(state.target_index, path.size() - 1);
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = anchor; i < path.size(); ++i) {
    const double d = dist(path[i]);
    if (d < nearest) {
      nearest = d;
      anchor = i;
    }
  }

  for (std::size_t i = anchor; i < path.size(); ++i) {
    if (dist(path[i]) >= lookahead_m) {
      next.target_index = i;
      return {path[next.target_index], next};
    }
  }
  next.target_index = path.size() - 1;
  next.path_complete = true;
  return {path.back(), next};
}

double filter_step(double y_prev, double u_new, double alpha) { return alpha * u_new + (1.0 - alpha) * y_prev; }

HeadingOutput heading_control(const geometry::Pose2D& pose, const Point2& target, const ControllerParams& params,
                              const ControllerState& state) {
  const double dx = target.x - pose.x;
  const double dy = target.y - pose.y;
  if (std::hypot(dx, dy) < 1e-9) {
    return {{params.v_cruise, state.y_prev}, state, 0.0, true};
  }
  const double desired = std::atan2(dy, dx);
  const double error = geometry::wrap_angle(desired - pose.psi);
  const double saturated = std::clamp(params.kp * error, -params.u_max, params.u_max);
  ControllerState next = state;
  next.y_prev = filter_step(state.y_prev, saturated, params.alpha);
  return {{params.v_cruise, next.y_prev}, next, error, false};
}

double cross_track_distance(const std::vector<Point2>& polyline, const Point2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Point2 a = polyline[i - 1];
    const Point2 b = polyline[i];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    const double f = len2 > 0.0 ? std::clamp(((p.x - a.x) * ex + (p.y - a.y) * ey) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::hypot(p.x - (a.x + f * ex), p.y - (a.y + f * ey)));
  }
  if (polyline.size() == 1) {
    best = std::hypot(p.x - polyline[0].x, p.y - polyline[0].y);
  }
  return best;
}

}  // namespace iea::control

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

// Shared fixtures for the test binaries. Values here are built from first
// principles, not from the library, so they can serve as oracles.

#pragma once

#include <array>
#include <cmath>
#include <string>

#include "core/geometry.hpp"

namespace iea::testing {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kAltitude = 9.0;
inline constexpr double kPitch = kPi / 4.0;

/// Half vertical field of view that makes a 9 m high camera pitched 45 deg
/// see 53 m of road: 9 (tan(45 + a) - tan(45 - a)) = 53, solved by bisection.
inline double footprint_half_fov() {
  auto footprint = [](double a) { return kAltitude * (std::tan(kPi / 4 + a) - std::tan(kPi / 4 - a)); };
  double lo = 0.0;
  double hi = kPi / 4 - 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (footprint(mid) < 53.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double default_focal() { return 300.0 / std::tan(footprint_half_fov()); }

inline geometry::CameraModel default_camera(double x = 0.0) {
  geometry::CameraModel cam;
  cam.position = {x, 0.0, kAltitude};
  cam.orientation = {0.0, kPitch, 0.0};
  cam.fx = cam.fy = default_focal();
  cam.cx = 400.0;
  cam.cy = 300.0;
  cam.width = 800;
  cam.height = 600;
  return cam;
}

/// Pixel of a world point for a camera with zero roll and yaw, from the
/// pitch rotation written out by hand: body coordinates of d = P - C are
/// (c dx - s dz, dy, s dx + c dz); the optical frame is (-y_b, -z_b, x_b).
struct PitchOnlyPixel {
  double u;
  double v;
  double depth;
};
inline PitchOnlyPixel pitch_only_project(const geometry::CameraModel& cam, double X, double Y, double Z) {
  const double c = std::cos(cam.orientation.pitch);
  const double s = std::sin(cam.orientation.pitch);
  const double dx = X - cam.position.x;
  const double dy = Y - cam.position.y;
  const double dz = Z - cam.position.z;
  const double xb = c * dx - s * dz;
  const double yb = dy;
  const double zb = s * dx + c * dz;
  return {cam.cx + cam.fx * (-yb) / xb, cam.cy + cam.fy * (-zb) / xb, xb};
}

/// Vehicle corner pixels for a pose with psi = 0, via pitch_only_project.
inline std::array<PitchOnlyPixel, 4> corner_pixels(const geometry::CameraModel& cam, double x, double y,
                                                   double length = 4.5, double width = 1.8) {
  return {pitch_only_project(cam, x + length / 2, y + width / 2, 0.0),
          pitch_only_project(cam, x + length / 2, y - width / 2, 0.0),
          pitch_only_project(cam, x - length / 2, y - width / 2, 0.0),
          pitch_only_project(cam, x - length / 2, y + width / 2, 0.0)};
}

}  // namespace iea::testing

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

// Reference frames and pinhole camera math.
//
// World frame: x along the road, y to the left, z up; the road is z = 0.
// A camera with zero roll/pitch/yaw looks along +x. Its orientation is the
// intrinsic yaw (about z), pitch (about y, positive tilts the optical axis
// below the horizon), roll (about the optical axis) sequence. The optical
// frame used by the intrinsics is u right, v down, optical axis forward.
// Pixel centres sit on integer (u, v) coordinates.

#pragma once

#include <optional>

#include <Eigen/Dense>

namespace iea::geometry {

inline constexpr double kPi = 3.14159265358979323846;

struct WorldPoint {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

struct PixelPoint {
  double u{0.0};
  double v{0.0};
};

/// Planar pose; psi is the heading in the world frame, wrapped to [-pi, pi].
struct Pose2D {
  double x{0.0};
  double y{0.0};
  double psi{0.0};
};

struct Orientation {
  double roll{0.0};
  double pitch{0.0};
  double yaw{0.0};
};

struct CameraModel {
  WorldPoint position;
  Orientation orientation;
  double fx{1.0};
  double fy{1.0};
  double cx{0.5};
  double cy{0.5};
  int width{1};
  int height{1};
};

using CameraMatrix = Eigen::Matrix<double, 3, 4>;

/// Throws InvalidCamera if intrinsics, image size or altitude are out of range
/// or the camera matrix is singular.
void validate_camera(const CameraModel& camera);

Eigen::Matrix3d intrinsic_matrix(const CameraModel& camera);

/// Rotation taking world-frame vectors into the optical frame.
Eigen::Matrix3d world_to_optical(const Orientation& orientation);

/// K [R | t] with t = -R C.
CameraMatrix camera_matrix(const CameraModel& camera);

/// Homogeneous projection; nullopt when the point is on or behind the camera
/// plane (w <= 0). Points outside the image still project; see in_image().
std::optional<PixelPoint> project(const CameraModel& camera, const WorldPoint& p);

bool in_image(const CameraModel& camera, const PixelPoint& p);

/// Intersection of the pixel's viewing ray with the road plane z = 0;
/// nullopt when the ray is parallel to the plane or points away from it.
std::optional<WorldPoint> back_project_ground(const CameraModel& camera, const PixelPoint& p);

/// P = C + lambda M^-1 p with lambda = depth * |m3|, i.e. the point on the
/// pixel's ray whose camera-frame depth equals `depth`.
WorldPoint back_project_depth(const CameraModel& camera, const PixelPoint& p, double depth);

/// Wraps to [-pi, pi]; both -pi and pi map to +pi.
double wrap_angle(double a);

}  // namespace iea::geometry

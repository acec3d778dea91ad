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

#include "core/geometry.hpp"

#include <cmath>

#include "core/error.hpp"

namespace iea::geometry {

namespace {

// Camera body frame (x forward, y left, z up) to optical frame.
Eigen::Matrix3d body_to_optical() {
  Eigen::Matrix3d p;
  p << 0, -1, 0,
       0, 0, -1,
       1, 0, 0;
  return p;
}

Eigen::Vector3d to_eigen(const WorldPoint& p) { return {p.x, p.y, p.z}; }

}  // namespace

void validate_camera(const CameraModel& camera) {
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    throw InvalidCamera("focal lengths must be positive");
  }
  if (camera.width <= 0 || camera.height <= 0) {
    throw InvalidCamera("image size must be positive");
  }
  if (!(camera.cx > 0.0 && camera.cx < camera.width) || !(camera.cy > 0.0 && camera.cy < camera.height)) {
    throw InvalidCamera("principal point must lie inside the image");
  }
  const auto& c = camera.position;
  const auto& o = camera.orientation;
  if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z) || !std::isfinite(o.roll) ||
      !std::isfinite(o.pitch) || !std::isfinite(o.yaw)) {
    throw InvalidCamera("camera pose must be finite");
  }
  if (!(c.z > 0.0)) {
    throw InvalidCamera("camera must sit above the road plane");
  }
}

Eigen::Matrix3d intrinsic_matrix(const CameraModel& camera) {
  Eigen::Matrix3d k;
  k << camera.fx, 0, camera.cx,
       0, camera.fy, camera.cy,
       0, 0, 1;
  return k;
}

Eigen::Matrix3d world_to_optical(const Orientation& orientation) {
  const Eigen::Matrix3d body_to_world =
      (Eigen::AngleAxisd(orientation.yaw, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(orientation.pitch, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(orientation.roll, Eigen::Vector3d::UnitX()))
          .toRotationMatrix();
  return body_to_optical() * body_to_world.transpose();
}

CameraMatrix camera_matrix(const CameraModel& camera) {
  validate_camera(camera);
  const Eigen::Matrix3d r = world_to_optical(camera.orientation);
  const Eigen::Vector3d t = -r * to_eigen(camera.position);
  CameraMatrix rt;
  rt << r, t;
  CameraMatrix p = intrinsic_matrix(camera) * rt;
  const double det = p.leftCols<3>().determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12) {
    throw InvalidCamera("camera matrix is singular");
  }
  return p;
}

std::optional<PixelPoint> project(const CameraModel& camera, const WorldPoint& p) {
  const CameraMatrix m = camera_matrix(camera);
  const Eigen::Vector3d h = m * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
  if (!(h.z() > 0.0)) {
    return std::nullopt;
  }
  return PixelPoint{h.x() / h.z(), h.y() / h.z()};
}

bool in_image(const CameraModel& camera, const PixelPoint& p) {
  return p.u >= 0.0 && p.v >= 0.0 && p.u <= camera.width - 1.0 && p.v <= camera.height - 1.0;
}

std::optional<WorldPoint> back_project_ground(const CameraModel& camera, const PixelPoint& p) {
  const CameraMatrix m = camera_matrix(camera);
  const Eigen::Matrix3d m_inv = m.leftCols<3>().inverse();
  const Eigen::Vector3d centre = -m_inv * m.col(3);
  const Eigen::Vector3d ray = m_inv * Eigen::Vector3d(p.u, p.v, 1.0);
  if (std::abs(ray.z()) < 1e-15) {
    return std::nullopt;
  }
  const double lambda = -centre.z() / ray.z();
  if (!(lambda > 0.0)) {
    return std::nullopt;
  }
  const Eigen::Vector3d g = centre + lambda * ray;
  return WorldPoint{g.x(), g.y(), 0.0};
}

WorldPoint back_project_depth(const CameraModel& camera, const PixelPoint& p, double depth) {
  if (!(depth > 0.0)) {
    throw ValidationError("back-projection depth must be positive");
  }
  const CameraMatrix m = camera_matrix(camera);
  const Eigen::Matrix3d sub = m.leftCols<3>();
  const Eigen::Matrix3d m_inv = sub.inverse();
  const Eigen::Vector3d centre = -m_inv * m.col(3);
  const double lambda = depth * sub.row(2).norm();
  const Eigen::Vector3d q = centre + lambda * (m_inv * Eigen::Vector3d(p.u, p.v, 1.0));
  return WorldPoint{q.x(), q.y(), q.z()};
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) {
    r = kPi;
  }
  return r;
}

}  // namespace iea::geometry

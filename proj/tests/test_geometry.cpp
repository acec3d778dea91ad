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

#include <doctest.h>

#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/geometry.hpp"
#include "support.hpp"

using namespace iea;
using namespace iea::geometry;
using iea::testing::default_camera;

namespace {

// K [R | -R C] for a pitch-only camera, composed element by element.
CameraMatrix composed_oracle(const CameraModel& cam) {
  const double c = std::cos(cam.orientation.pitch);
  const double s = std::sin(cam.orientation.pitch);
  // Body-to-world rotation about y, transposed, then the optical permutation.
  const double ry_t[3][3] = {{c, 0, -s}, {0, 1, 0}, {s, 0, c}};
  const double perm[3][3] = {{0, -1, 0}, {0, 0, -1}, {1, 0, 0}};
  const double k[3][3] = {{cam.fx, 0, cam.cx}, {0, cam.fy, cam.cy}, {0, 0, 1}};
  double r[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int m = 0; m < 3; ++m) r[i][j] += perm[i][m] * ry_t[m][j];
  const double C[3] = {cam.position.x, cam.position.y, cam.position.z};
  double t[3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i] -= r[i][j] * C[j];
  CameraMatrix out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int m = 0; m < 3; ++m) acc += k[i][m] * r[m][j];
      out(i, j) = acc;
    }
    double acc = 0;
    for (int m = 0; m < 3; ++m) acc += k[i][m] * t[m];
    out(i, 3) = acc;
  }
  return out;
}

double dist(const WorldPoint& a, const WorldPoint& b) { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); }

}  // namespace

TEST_CASE("zero rotation is the fixed world-to-optical permutation") {
  Eigen::Matrix3d perm;
  perm << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  CHECK(world_to_optical({}).isApprox(perm, 0.0));

  auto cam = default_camera();
  cam.orientation = {};
  const auto P = camera_matrix(cam);
  const Eigen::Matrix3d K = intrinsic_matrix(cam);
  CHECK((P.leftCols<3>() - K * perm).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::Vector3d C(cam.position.x, cam.position.y, cam.position.z);
  CHECK((P.col(3) + K * perm * C).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("default camera matrix matches an element-by-element composition") {
  const auto cam = default_camera();
  const auto got = camera_matrix(cam);
  const auto want = composed_oracle(cam);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(got(i, j) == doctest::Approx(want(i, j)).epsilon(1e-13));
    }
  }
}

TEST_CASE("scaling K scales the top two rows only") {
  const auto cam = default_camera(12.0);
  auto scaled = cam;
  const double s = 2.5;
  scaled.fx *= s;
  scaled.fy *= s;
  scaled.cx *= s;
  scaled.cy *= s;
  scaled.width = static_cast<int>(cam.width * s);
  scaled.height = static_cast<int>(cam.height * s);
  const auto a = camera_matrix(cam);
  const auto b = camera_matrix(scaled);
  CHECK((b.topRows<2>() - s * a.topRows<2>()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((b.row(2) - a.row(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid cameras are rejected") {
  auto cam = default_camera();
  SUBCASE("focal length") {
    cam.fx = 0.0;
    CHECK_THROWS_AS(camera_matrix(cam), InvalidCamera);
  }
  SUBCASE("principal point outside the image") {
    cam.cx = 800.0;
    CHECK_THROWS_AS(camera_matrix(cam), InvalidCamera);
  }
  SUBCASE("below the road") {
    cam.position.z = 0.0;
    CHECK_THROWS_AS(camera_matrix(cam), InvalidCamera);
  }
  SUBCASE("non-finite angle") {
    cam.orientation.yaw = std::nan("");
    CHECK_THROWS_AS(camera_matrix(cam), InvalidCamera);
  }
}

TEST_CASE("optical-axis ground point hits the principal point") {
  const auto cam = default_camera();
  const auto px = project(cam, {9.0, 0.0, 0.0});
  REQUIRE(px);
  CHECK(px->u == doctest::Approx(400.0).epsilon(1e-12));
  CHECK(px->v == doctest::Approx(300.0).epsilon(1e-12));

  const auto back = back_project_ground(cam, {400.0, 300.0});
  REQUIRE(back);
  CHECK(dist(*back, {9.0, 0.0, 0.0}) < 1e-9);
}

TEST_CASE("a point behind the camera does not project") {
  CHECK_FALSE(project(default_camera(), {-10.0, 0.0, 9.0}).has_value());
}

TEST_CASE("ground point (20, 2, 0) against a hand-written projection") {
  const auto cam = default_camera();
  const auto want = iea::testing::pitch_only_project(cam, 20.0, 2.0, 0.0);
  const auto got = project(cam, {20.0, 2.0, 0.0});
  REQUIRE(got);
  CHECK(got->u == doctest::Approx(want.u).epsilon(1e-12));
  CHECK(got->v == doctest::Approx(want.v).epsilon(1e-12));
  CHECK(in_image(cam, *got));

  const auto back = back_project_ground(cam, *got);
  REQUIRE(back);
  CHECK(dist(*back, {20.0, 2.0, 0.0}) < 1e-9);
}

TEST_CASE("pixels above the horizon have no ground intersection") {
  auto cam = default_camera();
  // The horizon sits fy * tan(45 deg) = fy rows above the principal point.
  CHECK_FALSE(back_project_ground(cam, {400.0, 300.0 - cam.fy - 1.0}).has_value());
  CHECK(back_project_ground(cam, {400.0, 300.0 - cam.fy + 1.0}).has_value());
}

TEST_CASE("fixed-depth back-projection") {
  const auto cam = default_camera();
  const double root2 = std::sqrt(2.0);

  SUBCASE("true axis distance reaches the road") {
    const auto p = back_project_depth(cam, {400.0, 300.0}, 9.0 * root2);
    CHECK(dist(p, {9.0, 0.0, 0.0}) < 1e-9);
  }
  SUBCASE("depth equal to the altitude stops short by 1/sqrt(2)") {
    const auto p = back_project_depth(cam, {400.0, 300.0}, 9.0);
    const WorldPoint want{9.0 / root2, 0.0, 9.0 - 9.0 / root2};
    CHECK(dist(p, want) < 1e-9);
  }
  SUBCASE("non-positive depth is rejected") {
    CHECK_THROWS_AS(back_project_depth(cam, {400.0, 300.0}, 0.0), ValidationError);
  }
}

TEST_CASE("fixed-depth points lie on the pixel ray at the requested depth") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 799.0);
  std::uniform_real_distribution<double> v(0.0, 599.0);
  std::uniform_real_distribution<double> d(0.5, 80.0);
  const auto cam = default_camera(30.0);
  const auto P = camera_matrix(cam);
  const Eigen::Vector3d C(cam.position.x, cam.position.y, cam.position.z);
  const Eigen::Vector3d axis = world_to_optical(cam.orientation).row(2).transpose();
  for (int i = 0; i < 500; ++i) {
    const PixelPoint px{u(rng), v(rng)};
    const double depth = d(rng);
    const auto w = back_project_depth(cam, px, depth);
    const Eigen::Vector3d X(w.x, w.y, w.z);
    CHECK((X - C).dot(axis) == doctest::Approx(depth).epsilon(1e-12));
    const Eigen::Vector3d ray = P.leftCols<3>().inverse() * Eigen::Vector3d(px.u, px.v, 1.0);
    const Eigen::Vector3d off = X - C;
    CHECK(off.dot(ray) > 0.0);
    CHECK(off.cross(ray).norm() < 1e-9 * off.norm() * ray.norm());
  }
}

TEST_CASE("ground roundtrip over random footprint points, every default camera") {
  std::mt19937_64 rng(11);
  for (double cam_x : {30.0, 70.0, 110.0}) {
    const auto cam = default_camera(cam_x);
    std::uniform_real_distribution<double> x(cam_x + 1.5, cam_x + 54.0);
    std::uniform_real_distribution<double> y(-4.0, 4.0);
    int checked = 0;
    while (checked < 1000) {
      const WorldPoint p{x(rng), y(rng), 0.0};
      const auto px = project(cam, p);
      REQUIRE(px);
      if (!in_image(cam, *px)) {
        continue;
      }
      const auto back = back_project_ground(cam, *px);
      REQUIRE(back);
      CHECK(dist(*back, p) < 1e-9);
      ++checked;
    }
  }
}

TEST_CASE("projection is invariant to homogeneous scale") {
  const auto cam = default_camera(30.0);
  const auto P = camera_matrix(cam);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(35.0, 80.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const WorldPoint p{coord(rng), coord(rng) - 57.5, 0.3};
    const auto base = project(cam, p);
    REQUIRE(base);
    const double k = scale(rng);
    const Eigen::Vector3d h = P * Eigen::Vector4d(k * p.x, k * p.y, k * p.z, k);
    CHECK(h(0) / h(2) == doctest::Approx(base->u).epsilon(1e-12));
    CHECK(h(1) / h(2) == doctest::Approx(base->v).epsilon(1e-12));
  }
}

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(std::abs(wrap_angle(2.0 * kPi)) < 1e-15);
  CHECK(wrap_angle(-6.0) == doctest::Approx(-6.0 + 2.0 * kPi).epsilon(1e-15));
  CHECK(wrap_angle(-6.0) == doctest::Approx(0.28319).epsilon(1e-5));
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-kPi) == kPi);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> any(-100.0, 100.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = any(rng);
    const double w = wrap_angle(a);
    CHECK(w >= -kPi);
    CHECK(w <= kPi);
    CHECK(wrap_angle(w) == w);
    // Congruent modulo 2 pi.
    const double turns = (a - w) / (2.0 * kPi);
    CHECK(std::abs(turns - std::round(turns)) < 1e-12);
    // Odd away from the +-pi boundary.
    if (std::abs(std::abs(w) - kPi) > 1e-9) {
      CHECK(wrap_angle(-a) == doctest::Approx(-w).epsilon(1e-12));
    }
  }
}

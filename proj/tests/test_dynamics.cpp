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
#include <vector>

#include "core/dynamics.hpp"
#include "core/error.hpp"

using namespace iea;
using namespace iea::dynamics;

namespace {

const DynamicsParams kNoLag{0.0, 0.0, 10.0};

VehicleState run(VehicleState s, const std::vector<DbwCommand>& cmds, double hold, double dt,
                 const DynamicsParams& p) {
  const int sub = static_cast<int>(std::lround(hold / dt));
  for (const auto& c : cmds) {
    for (int i = 0; i < sub; ++i) {
      s = step(s, c, dt, p);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("at rest with a zero command only time moves") {
  VehicleState s;
  s.pose = {4.0, -2.0, 0.5};
  const auto n = step(s, {}, 0.02);
  CHECK(n.pose.x == s.pose.x);
  CHECK(n.pose.y == s.pose.y);
  CHECK(n.pose.psi == s.pose.psi);
  CHECK(n.v == 0.0);
  CHECK(n.t == doctest::Approx(0.02));
}

TEST_CASE("settled at 3 m/s heading 0 covers 3 m in one second") {
  VehicleState s;
  s.v = 3.0;
  for (int i = 0; i < 10; ++i) {
    s = step(s, {3.0, 0.0}, 0.1);
  }
  CHECK(s.pose.x == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.pose.y == 0.0);
  CHECK(s.t == doctest::Approx(1.0));
}

TEST_CASE("constant turn matches the closed-form circular arc") {
  VehicleState s;
  s.v = 3.0;
  s.yaw_rate = 0.3;
  for (int i = 0; i < 50; ++i) {
    s = step(s, {3.0, 0.3}, 0.02, kNoLag);
  }
  // Radius v / omega = 10 m, heading change 0.3 rad.
  const double r = 10.0;
  CHECK(s.pose.x == doctest::Approx(r * std::sin(0.3)).epsilon(1e-13));
  CHECK(s.pose.y == doctest::Approx(r * (1.0 - std::cos(0.3))).epsilon(1e-12));
  CHECK(s.pose.psi == doctest::Approx(0.3).epsilon(1e-14));
  const double chord = std::hypot(s.pose.x, s.pose.y);
  CHECK(chord == doctest::Approx(2.0 * r * std::sin(0.15)).epsilon(1e-13));
}

TEST_CASE("speed lag follows the discrete first-order closed form") {
  VehicleState s;
  const DynamicsParams p{0.5, 0.2, 1.0};
  const double dt = 0.02;
  const double a = 1.0 - dt / p.tau_v;
  double x = 0.0;
  for (int k = 1; k <= 100; ++k) {
    s = step(s, {3.0, 0.0}, dt, p);
    const double v = 3.0 * (1.0 - std::pow(a, k));
    x += v * dt;
    CHECK(s.v == doctest::Approx(v).epsilon(1e-12));
  }
  CHECK(s.pose.x == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("yaw-rate command is limited") {
  VehicleState s;
  s.v = 2.0;
  const auto n = step(s, {2.0, 5.0}, 0.05, {0.5, 0.0, 1.0});
  CHECK(n.yaw_rate == 1.0);
}

TEST_CASE("step size and command validation") {
  VehicleState s;
  CHECK_THROWS_AS(step(s, {}, 0.0), ValidationError);
  CHECK_THROWS_AS(step(s, {}, -0.01), ValidationError);
  CHECK_THROWS_AS(step(s, {}, 0.1000001), ValidationError);
  CHECK_NOTHROW(step(s, {}, 0.1));
  CHECK_THROWS_AS(step(s, {std::nan(""), 0.0}, 0.02), ValidationError);
}

TEST_CASE("exact arcs make the result independent of the step size") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> v(0.0, 8.0);
  std::uniform_real_distribution<double> w(-0.9, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DbwCommand> cmds;
    for (int i = 0; i < 8; ++i) {
      cmds.push_back({v(rng), w(rng)});
    }
    VehicleState s0;
    s0.pose = {1.0, -1.0, 0.3};
    const auto a = run(s0, cmds, 0.1, 0.1, kNoLag);
    const auto b = run(s0, cmds, 0.1, 0.05, kNoLag);
    const auto c = run(s0, cmds, 0.1, 0.025, kNoLag);
    CHECK(std::hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y) < 1e-12);
    CHECK(std::hypot(b.pose.x - c.pose.x, b.pose.y - c.pose.y) < 1e-12);
  }
}

TEST_CASE("speed never overshoots a constant command") {
  for (double v0 : {0.0, 1.0, 9.0}) {
    for (double target : {0.0, 3.0, 6.0}) {
      VehicleState s;
      s.v = v0;
      for (int i = 0; i < 500; ++i) {
        const double before = s.v;
        s = step(s, {target, 0.0}, 0.02);
        if (v0 <= target) {
          CHECK(s.v <= target);
          CHECK(s.v >= before);
        } else {
          CHECK(s.v >= target);
          CHECK(s.v <= before);
        }
      }
    }
  }
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  auto go = [] {
    VehicleState s;
    std::vector<double> out;
    for (int i = 0; i < 300; ++i) {
      s = step(s, {3.0, 0.4 * std::sin(0.05 * i)}, 0.02);
      out.insert(out.end(), {s.pose.x, s.pose.y, s.pose.psi, s.v, s.yaw_rate});
    }
    return out;
  };
  CHECK(go() == go());
}

TEST_CASE("heading stays wrapped through full circles") {
  VehicleState s;
  s.v = 1.0;
  for (int i = 0; i < 2000; ++i) {
    s = step(s, {1.0, 1.0}, 0.02);
    CHECK(s.pose.psi <= 3.14159265358979323846);
    CHECK(s.pose.psi >= -3.14159265358979323846);
  }
}

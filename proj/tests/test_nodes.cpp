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
#include <type_traits>

#include "core/error.hpp"
#include "core/nodes.hpp"
#include "core/scenario.hpp"
#include "support.hpp"

using namespace iea;
using namespace iea::nodes;

namespace {

scenario::ScenarioConfig bundled(const std::string& name) {
  return scenario::load_scenario_file(std::string(IEA_SCENARIO_DIR) + "/" + name + ".json");
}

netbus::Received pose_in(double t, double x, double y, double psi = 0.0, double v = 3.0) {
  return {{kVehicleId, 1, t, netbus::PosePayload{x, y, psi, v}}, t, 0};
}

netbus::Received est_in(const std::string& id, std::uint64_t seq, double t, double x, double y) {
  return {{id, seq, t, netbus::EstimatePayload{id, x, y, t}}, t, 0};
}

// The control path may only see estimates and a heading.
static_assert(std::is_same_v<decltype(&smartconnect_step),
                             SmartConnectOutput (*)(SmartConnect&, double, std::span<const fusion::PositionEstimate>,
                                                    double)>);

}  // namespace

TEST_CASE("default cell layout: 53 m footprints overlapping by about 13 m") {
  const auto cfg = bundled("straight_3ms");
  const auto layout = compute_cell_layout(cfg.cameras);
  REQUIRE(layout.size() == 3);
  const double a = iea::testing::footprint_half_fov();
  const double fy = iea::testing::default_focal();
  const double quarter = iea::testing::kPi / 4;
  const double xs[] = {30.0, 70.0, 110.0};
  for (std::size_t i = 0; i < 3; ++i) {
    // Image rows 0 and 599 at 300 and 299 px from the principal row.
    const double far = xs[i] + 9.0 / std::tan(quarter - a);
    const double near = xs[i] + 9.0 / std::tan(quarter + std::atan(299.0 / fy));
    CHECK(layout[i].mssp_id == "mssp" + std::to_string(i + 1));
    CHECK(layout[i].x_far == doctest::Approx(far).epsilon(1e-12));
    CHECK(layout[i].x_near == doctest::Approx(near).epsilon(1e-12));
    CHECK(layout[i].x_far - layout[i].x_near == doctest::Approx(53.0).epsilon(2e-3));
  }
  for (std::size_t i = 1; i < 3; ++i) {
    const double overlap = layout[i - 1].x_far - layout[i].x_near;
    CHECK(overlap > 12.9);
    CHECK(overlap < 13.1);
  }
}

TEST_CASE("non-overlapping cameras are rejected") {
  auto cfg = bundled("straight_3ms");
  cfg.cameras[1].model.position.x = 100.0;
  CHECK_THROWS_AS(compute_cell_layout(cfg.cameras), ValidationError);
}

TEST_CASE("MSSP node") {
  const auto cfg = bundled("straight_3ms");

  SUBCASE("no pose ever received") {
    auto node = make_mssp_node(cfg, 0);
    for (int k = 0; k < 20; ++k) {
      const auto out = mssp_step(node, k * 0.05, {});
      CHECK(out.captured);
      CHECK(out.estimates.empty());
    }
  }
  SUBCASE("vehicle outside the footprint") {
    auto node = make_mssp_node(cfg, 0);
    for (int k = 0; k < 20; ++k) {
      const auto in = pose_in(k * 0.05, 120.0 + k * 0.15, 0.0);
      CHECK(mssp_step(node, k * 0.05, std::span(&in, 1)).estimates.empty());
    }
  }
  SUBCASE("vehicle on the optical axis") {
    auto node = make_mssp_node(cfg, 0);
    mssp_step(node, 0.0, {});
    const auto in = pose_in(0.04, 39.0, 0.0);
    const auto out = mssp_step(node, 0.05, std::span(&in, 1));
    REQUIRE(out.estimates.size() == 1);
    const auto& msg = out.estimates[0];
    const auto& e = std::get<netbus::EstimatePayload>(msg.payload);
    CHECK(msg.sender == "mssp1");
    CHECK(e.mssp_id == "mssp1");
    CHECK(e.t_capture == doctest::Approx(0.05));
    CHECK(std::hypot(e.x - 39.0, e.y) < 0.5);
    CHECK(node.tracker.mode == vision::TrackerMode::Tracking);

    SUBCASE("a frozen pose keeps being reported") {
      for (int k = 2; k < 30; ++k) {
        const auto again = mssp_step(node, k * 0.05, {});
        REQUIRE(again.estimates.size() == 1);
        const auto& f = std::get<netbus::EstimatePayload>(again.estimates[0].payload);
        CHECK(f.x == e.x);
        CHECK(f.y == e.y);
        CHECK(again.estimates[0].seq == msg.seq + (k - 1));
      }
    }
  }
  SUBCASE("at most one capture per call, on the frame grid") {
    auto node = make_mssp_node(cfg, 0);
    CHECK(mssp_step(node, 0.0, {}).captured);
    CHECK_FALSE(mssp_step(node, 0.02, {}).captured);
    CHECK_FALSE(mssp_step(node, 0.04, {}).captured);
    CHECK(mssp_step(node, 0.06, {}).captured);
    CHECK(node.next_capture() == doctest::Approx(0.10));
    // A late call skips missed frames instead of bursting.
    CHECK(mssp_step(node, 0.31, {}).captured);
    CHECK(node.next_capture() == doctest::Approx(0.35));
  }
  SUBCASE("estimates only while tracking") {
    auto node = make_mssp_node(cfg, 1);
    for (int k = 0; k < 600; ++k) {
      const double t = k * 0.05;
      const auto in = pose_in(t, 60.0 + 3.0 * t, 0.0);
      const auto out = mssp_step(node, t, std::span(&in, 1));
      if (!out.estimates.empty()) {
        CHECK(node.tracker.mode == vision::TrackerMode::Tracking);
      }
    }
  }
}

TEST_CASE("truth-source MSSP reports the pose while fully in view") {
  auto cfg = bundled("baseline_truth_3ms");
  auto node = make_mssp_node(cfg, 0);
  const auto inside = pose_in(0.0, 50.0, 0.4);
  const auto out = mssp_step(node, 0.0, std::span(&inside, 1));
  REQUIRE(out.estimates.size() == 1);
  const auto& e = std::get<netbus::EstimatePayload>(out.estimates[0].payload);
  CHECK(e.x == 50.0);
  CHECK(e.y == 0.4);
  const auto edge = pose_in(0.05, 84.0, 0.0);
  CHECK(mssp_step(node, 0.05, std::span(&edge, 1)).estimates.empty());
  CHECK(fully_in_view(node.camera, {50.0, 0.4, 0.0}, {}));
  CHECK_FALSE(fully_in_view(node.camera, {84.0, 0.0, 0.0}, {}));
}

TEST_CASE("vehicle without fixes drives straight from rest") {
  auto cfg = bundled("straight_3ms");
  cfg.initial_speed = 0.0;
  cfg.initial_pose = {0.0, 0.0, 0.0};
  auto node = make_vehicle_node(cfg);
  for (int k = 0; k < 50; ++k) {
    const auto out = vehicle_step(node, k * cfg.dt, {});
    CHECK(out.phase == Phase::WaitingForFirstFix);
    CHECK(out.command.v_cmd == 3.0);
    CHECK(out.command.yaw_rate_cmd == 0.0);
    CHECK_FALSE(out.fused.has_value());
  }
  // Discrete lag: v_k = 3 (1 - (1 - dt/tau)^k), x = sum v_k dt.
  const double r = 1.0 - cfg.dt / cfg.dynamics.tau_v;
  double x = 0.0;
  for (int k = 1; k <= 50; ++k) {
    x += 3.0 * (1.0 - std::pow(r, k)) * cfg.dt;
  }
  CHECK(node.plant.pose.x == doctest::Approx(x).epsilon(1e-12));
  CHECK(node.plant.pose.y == 0.0);
  // Within lag tolerance of 3 m: the lag costs tau * v of distance at most.
  CHECK(node.plant.pose.x > 3.0 - cfg.dynamics.tau_v * 3.0);
}

TEST_CASE("perfect estimates reproduce a direct truth-fed controller") {
  auto cfg = bundled("straight_3ms");
  cfg.initial_pose = {0.0, 0.8, 0.1};
  auto node = make_vehicle_node(cfg);

  dynamics::VehicleState s = node.plant;
  const auto path = control::interpolate_path(cfg.plan());
  control::ControllerState cs;
  const auto params = cfg.controller_params();

  for (int k = 0; k < 2000; ++k) {
    const double t = k * cfg.dt;
    const auto in = est_in("mssp1", k + 1, t, node.plant.pose.x, node.plant.pose.y);
    const auto out = vehicle_step(node, t, std::span(&in, 1));

    const auto sel = control::select_target(path, cs, s.pose, cfg.lookahead_m);
    cs = sel.state;
    dynamics::DbwCommand cmd{0.0, 0.0};
    if (!cs.path_complete) {
      const auto hc = control::heading_control(s.pose, sel.target, params, cs);
      cs = hc.state;
      cmd = hc.command;
    }
    s = dynamics::step(s, cmd, cfg.dt, cfg.dynamics);

    CHECK(out.command.yaw_rate_cmd == cmd.yaw_rate_cmd);
    CHECK(node.plant.pose.x == s.pose.x);
    CHECK(node.plant.pose.y == s.pose.y);
    CHECK(node.plant.pose.psi == s.pose.psi);
  }
}

TEST_CASE("losing the final cell stops the vehicle within the grace period") {
  auto cfg = bundled("straight_3ms");
  cfg.initial_pose = {150.0, 3.7, 0.0};
  auto node = make_vehicle_node(cfg);
  Phase last = Phase::WaitingForFirstFix;
  double t = 0.0;
  // One second of fixes from the last MSSP, then silence.
  for (int k = 0; k < 50; ++k, t += cfg.dt) {
    const auto in = est_in("mssp3", k + 1, t, node.plant.pose.x, node.plant.pose.y);
    last = vehicle_step(node, t, std::span(&in, 1)).phase;
  }
  CHECK(last == Phase::Driving);
  const double silence_from = t - cfg.dt;
  double stopped_at = -1.0;
  for (int k = 0; k < 500; ++k, t += cfg.dt) {
    const auto out = vehicle_step(node, t, {});
    CHECK(static_cast<int>(out.phase) >= static_cast<int>(last));
    last = out.phase;
    if (out.phase == Phase::Stopped) {
      CHECK(out.command.v_cmd == 0.0);
      if (stopped_at < 0) {
        stopped_at = t;
      }
    }
  }
  REQUIRE(stopped_at > 0);
  CHECK(stopped_at - silence_from > cfg.stop_grace);
  CHECK(stopped_at - silence_from <= cfg.stop_grace + 2 * cfg.dt);
  CHECK(node.plant.v < 0.01);
}

TEST_CASE("silence before the final cell does not stop the vehicle") {
  auto cfg = bundled("straight_3ms");
  auto node = make_vehicle_node(cfg);
  double t = 0.0;
  for (int k = 0; k < 10; ++k, t += cfg.dt) {
    const auto in = est_in("mssp1", k + 1, t, node.plant.pose.x, node.plant.pose.y);
    vehicle_step(node, t, std::span(&in, 1));
  }
  for (int k = 0; k < 300; ++k, t += cfg.dt) {
    CHECK(vehicle_step(node, t, {}).phase == Phase::Driving);
  }
}

TEST_CASE("each step broadcasts the pre-step true pose") {
  auto cfg = bundled("straight_3ms");
  auto node = make_vehicle_node(cfg);
  for (int k = 0; k < 5; ++k) {
    const auto before = node.plant;
    const auto out = vehicle_step(node, k * cfg.dt, {});
    const auto& p = std::get<netbus::PosePayload>(out.pose.payload);
    CHECK(out.pose.sender == kVehicleId);
    CHECK(out.pose.seq == static_cast<std::uint64_t>(k + 1));
    CHECK(out.pose.t_sent == k * cfg.dt);
    CHECK(p.x == before.pose.x);
    CHECK(p.v == before.v);
  }
}

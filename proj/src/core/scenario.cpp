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

#include "core/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/nodes.hpp"

namespace iea::scenario {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) {
    throw ValidationError(where + " must be an object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw ValidationError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    return;
  }
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ValidationError("missing key '" + std::string(key) + "' in " + where);
  }
  T out{};
  read(obj, key, out);
  return out;
}

CameraSpec parse_camera(const json& j, std::size_t index) {
  const std::string where = "cameras[" + std::to_string(index) + "]";
  check_keys(j, {"id", "position", "roll", "pitch", "yaw", "fx", "fy", "cx", "cy", "width", "height"}, where);
  CameraSpec cam;
  cam.id = "mssp" + std::to_string(index + 1);
  read(j, "id", cam.id);
  const auto pos = require<std::vector<double>>(j, "position", where);
  if (pos.size() != 3) {
    throw ValidationError(where + ".position must have three components");
  }
  auto& m = cam.model;
  m.position = {pos[0], pos[1], pos[2]};
  read(j, "roll", m.orientation.roll);
  read(j, "pitch", m.orientation.pitch);
  read(j, "yaw", m.orientation.yaw);
  m.fx = require<double>(j, "fx", where);
  m.fy = require<double>(j, "fy", where);
  m.cx = require<double>(j, "cx", where);
  m.cy = require<double>(j, "cy", where);
  m.width = require<int>(j, "width", where);
  m.height = require<int>(j, "height", where);
  return cam;
}

json camera_json(const CameraSpec& cam) {
  const auto& m = cam.model;
  return json{{"id", cam.id},
              {"position", {m.position.x, m.position.y, m.position.z}},
              {"roll", m.orientation.roll},
              {"pitch", m.orientation.pitch},
              {"yaw", m.orientation.yaw},
              {"fx", m.fx},
              {"fy", m.fy},
              {"cx", m.cx},
              {"cy", m.cy},
              {"width", m.width},
              {"height", m.height}};
}

}  // namespace

control::ControllerParams ScenarioConfig::controller_params() const {
  auto p = controller;
  p.v_cruise = v_cruise;
  return p;
}

std::string ScenarioConfig::host_for(const std::string& node_id) const {
  const auto it = network.hosts.find(node_id);
  return it == network.hosts.end() ? network.host : it->second;
}

std::uint16_t ScenarioConfig::port_for(std::size_t mssp_index) const {
  return static_cast<std::uint16_t>(network.base_port + mssp_index);
}

std::string to_string(Mode mode) { return mode == Mode::Lockstep ? "lockstep" : "distributed"; }

Mode parse_mode(const std::string& text) {
  if (text == "lockstep") {
    return Mode::Lockstep;
  }
  if (text == "distributed") {
    return Mode::Distributed;
  }
  throw ValidationError("mode must be 'lockstep' or 'distributed', got '" + text + "'");
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) {
    throw ValidationError("scenario is not valid JSON");
  }
  check_keys(j,
             {"name", "mode", "seed", "duration_cap", "dt", "frame_rate", "cameras", "camera_spacing", "waypoints",
              "interp_spacing", "lookahead_m", "v_cruise", "controller", "link", "vehicle", "vision", "fusion",
              "position_source", "network", "log"},
             "scenario");
  ScenarioConfig cfg;
  read(j, "name", cfg.name);
  if (j.contains("mode")) {
    cfg.mode = parse_mode(require<std::string>(j, "mode", "scenario"));
  }
  read(j, "seed", cfg.seed);
  read(j, "duration_cap", cfg.duration_cap);
  read(j, "dt", cfg.dt);
  read(j, "frame_rate", cfg.frame_rate);

  if (!j.contains("cameras") || !j["cameras"].is_array()) {
    throw ValidationError("scenario needs a 'cameras' array");
  }
  for (std::size_t i = 0; i < j["cameras"].size(); ++i) {
    cfg.cameras.push_back(parse_camera(j["cameras"][i], i));
  }
  read(j, "camera_spacing", cfg.camera_spacing);

  const auto wps = require<std::vector<std::vector<double>>>(j, "waypoints", "scenario");
  for (const auto& w : wps) {
    if (w.size() != 2) {
      throw ValidationError("each waypoint must be [x, y]");
    }
    cfg.waypoints.push_back({w[0], w[1]});
  }
  read(j, "interp_spacing", cfg.interp_spacing);
  read(j, "lookahead_m", cfg.lookahead_m);
  read(j, "v_cruise", cfg.v_cruise);

  if (j.contains("controller")) {
    const auto& c = j["controller"];
    check_keys(c, {"kp", "u_max", "alpha"}, "controller");
    read(c, "kp", cfg.controller.kp);
    read(c, "u_max", cfg.controller.u_max);
    read(c, "alpha", cfg.controller.alpha);
  }
  if (j.contains("link")) {
    const auto& l = j["link"];
    check_keys(l, {"latency_min", "latency_max", "drop_probability"}, "link");
    read(l, "latency_min", cfg.link.latency_min);
    read(l, "latency_max", cfg.link.latency_max);
    read(l, "drop_probability", cfg.link.drop_probability);
  }
  cfg.initial_speed = cfg.v_cruise;
  if (j.contains("vehicle")) {
    const auto& v = j["vehicle"];
    check_keys(v, {"length", "width", "initial_pose", "initial_speed", "tau_v", "tau_omega", "yaw_rate_limit"},
               "vehicle");
    read(v, "length", cfg.vehicle_dims.length);
    read(v, "width", cfg.vehicle_dims.width);
    if (v.contains("initial_pose")) {
      const auto p = require<std::vector<double>>(v, "initial_pose", "vehicle");
      if (p.size() != 3) {
        throw ValidationError("vehicle.initial_pose must be [x, y, psi]");
      }
      cfg.initial_pose = {p[0], p[1], geometry::wrap_angle(p[2])};
    }
    read(v, "initial_speed", cfg.initial_speed);
    read(v, "tau_v", cfg.dynamics.tau_v);
    read(v, "tau_omega", cfg.dynamics.tau_omega);
    read(v, "yaw_rate_limit", cfg.dynamics.yaw_rate_limit);
  }
  if (j.contains("vision")) {
    const auto& v = j["vision"];
    check_keys(v, {"threshold", "min_area", "gate_px", "max_frames_lost", "noise_sigma", "reject_border"}, "vision");
    read(v, "threshold", cfg.tracker.threshold);
    read(v, "min_area", cfg.tracker.min_area);
    read(v, "gate_px", cfg.tracker.gate_px);
    read(v, "max_frames_lost", cfg.tracker.max_frames_lost);
    read(v, "reject_border", cfg.tracker.reject_border);
    read(v, "noise_sigma", cfg.noise_sigma);
  }
  if (j.contains("fusion")) {
    const auto& f = j["fusion"];
    check_keys(f, {"staleness_timeout", "stop_grace"}, "fusion");
    read(f, "staleness_timeout", cfg.staleness_timeout);
    read(f, "stop_grace", cfg.stop_grace);
  }
  if (j.contains("position_source")) {
    const auto src = require<std::string>(j, "position_source", "scenario");
    if (src == "vision") {
      cfg.position_source = PositionSource::Vision;
    } else if (src == "truth") {
      cfg.position_source = PositionSource::Truth;
    } else {
      throw ValidationError("position_source must be 'vision' or 'truth'");
    }
  }
  if (j.contains("network")) {
    const auto& n = j["network"];
    check_keys(n, {"host", "base_port", "hosts"}, "network");
    read(n, "host", cfg.network.host);
    read(n, "base_port", cfg.network.base_port);
    read(n, "hosts", cfg.network.hosts);
  }
  if (j.contains("log")) {
    const auto& l = j["log"];
    check_keys(l, {"dir", "run_log", "summary"}, "log");
    read(l, "dir", cfg.log.dir);
    read(l, "run_log", cfg.log.run_log);
    read(l, "summary", cfg.log.summary);
  }
  cfg.link.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot read scenario file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string to_json(const ScenarioConfig& cfg) {
  json cams = json::array();
  for (const auto& c : cfg.cameras) {
    cams.push_back(camera_json(c));
  }
  json wps = json::array();
  for (const auto& w : cfg.waypoints) {
    wps.push_back({w.x, w.y});
  }
  json j{{"name", cfg.name},
         {"mode", to_string(cfg.mode)},
         {"seed", cfg.seed},
         {"duration_cap", cfg.duration_cap},
         {"dt", cfg.dt},
         {"frame_rate", cfg.frame_rate},
         {"cameras", cams},
         {"camera_spacing", cfg.camera_spacing},
         {"waypoints", wps},
         {"interp_spacing", cfg.interp_spacing},
         {"lookahead_m", cfg.lookahead_m},
         {"v_cruise", cfg.v_cruise},
         {"controller", {{"kp", cfg.controller.kp}, {"u_max", cfg.controller.u_max}, {"alpha", cfg.controller.alpha}}},
         {"link",
          {{"latency_min", cfg.link.latency_min},
           {"latency_max", cfg.link.latency_max},
           {"drop_probability", cfg.link.drop_probability}}},
         {"vehicle",
          {{"length", cfg.vehicle_dims.length},
           {"width", cfg.vehicle_dims.width},
           {"initial_pose", {cfg.initial_pose.x, cfg.initial_pose.y, cfg.initial_pose.psi}},
           {"initial_speed", cfg.initial_speed},
           {"tau_v", cfg.dynamics.tau_v},
           {"tau_omega", cfg.dynamics.tau_omega},
           {"yaw_rate_limit", cfg.dynamics.yaw_rate_limit}}},
         {"vision",
          {{"threshold", cfg.tracker.threshold},
           {"min_area", cfg.tracker.min_area},
           {"gate_px", cfg.tracker.gate_px},
           {"max_frames_lost", cfg.tracker.max_frames_lost},
           {"reject_border", cfg.tracker.reject_border},
           {"noise_sigma", cfg.noise_sigma}}},
         {"fusion", {{"staleness_timeout", cfg.staleness_timeout}, {"stop_grace", cfg.stop_grace}}},
         {"position_source", cfg.position_source == PositionSource::Vision ? "vision" : "truth"},
         {"network", {{"host", cfg.network.host}, {"base_port", cfg.network.base_port}, {"hosts", cfg.network.hosts}}},
         {"log", {{"dir", cfg.log.dir}, {"run_log", cfg.log.run_log}, {"summary", cfg.log.summary}}}};
  return j.dump(2);
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.cameras.empty()) {
    throw ValidationError("scenario needs at least one camera");
  }
  if (!(cfg.duration_cap > 0.0)) {
    throw ValidationError("duration_cap must be positive");
  }
  if (!(cfg.dt > 0.0 && cfg.dt <= dynamics::kMaxStep)) {
    throw ValidationError("dt must be in (0, 0.1]");
  }
  if (!(cfg.frame_rate > 0.0)) {
    throw ValidationError("frame_rate must be positive");
  }
  std::set<std::string> ids{nodes::kVehicleId};
  for (const auto& c : cfg.cameras) {
    geometry::camera_matrix(c.model);
    if (!ids.insert(c.id).second) {
      throw ValidationError("duplicate node id '" + c.id + "'");
    }
  }
  if (cfg.camera_spacing > 0.0) {
    for (std::size_t i = 1; i < cfg.cameras.size(); ++i) {
      const auto& a = cfg.cameras[i - 1].model.position;
      const auto& b = cfg.cameras[i].model.position;
      if (std::abs(std::hypot(b.x - a.x, b.y - a.y) - cfg.camera_spacing) > 1e-6) {
        throw ValidationError("camera positions do not match camera_spacing");
      }
    }
  }
  control::validate_plan(cfg.plan());
  control::validate_params(cfg.controller_params());
  netbus::validate(cfg.link);
  if (!(cfg.vehicle_dims.length > 0.0) || !(cfg.vehicle_dims.width > 0.0)) {
    throw ValidationError("vehicle dimensions must be positive");
  }
  if (!(cfg.initial_speed >= 0.0)) {
    throw ValidationError("initial_speed must be non-negative");
  }
  if (!(cfg.dynamics.tau_v >= 0.0) || !(cfg.dynamics.tau_omega >= 0.0) || !(cfg.dynamics.yaw_rate_limit > 0.0)) {
    throw ValidationError("vehicle lag constants must be >= 0 and yaw_rate_limit > 0");
  }
  if (!(cfg.staleness_timeout > 0.0) || !(cfg.stop_grace > 0.0)) {
    throw ValidationError("staleness_timeout and stop_grace must be positive");
  }
  if (cfg.tracker.min_area < 1 || cfg.tracker.max_frames_lost < 0 || !(cfg.tracker.gate_px > 0.0)) {
    throw ValidationError("invalid tracker parameters");
  }
  if (cfg.noise_sigma < 0.0) {
    throw ValidationError("noise_sigma must be non-negative");
  }
  nodes::compute_cell_layout(cfg.cameras);
  if (cfg.mode == Mode::Distributed) {
    if (static_cast<std::size_t>(cfg.network.base_port) + cfg.cameras.size() > 65535 || cfg.network.base_port == 0) {
      throw ValidationError("base_port leaves no room for one port per node");
    }
  }
}

}  // namespace iea::scenario

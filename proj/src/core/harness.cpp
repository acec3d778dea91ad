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

#include "core/harness.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "core/error.hpp"
#include "core/nodes.hpp"

extern char** environ;

namespace iea::harness {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop_requested{false};
static_assert(std::atomic<bool>::is_always_lock_free);

constexpr double kTickEps = 1e-9;
constexpr double kRestSpeed = 0.01;
constexpr double kRateWindow = 1.0;

RunLogMeta make_meta(const scenario::ScenarioConfig& cfg) {
  RunLogMeta meta;
  meta.name = cfg.name;
  meta.dt = cfg.dt;
  meta.v_cruise = cfg.v_cruise;
  for (const auto& c : cfg.cameras) {
    meta.mssp_ids.push_back(c.id);
  }
  meta.plan = cfg.waypoints;
  return meta;
}

RunLogRow make_row(const nodes::VehicleStepOutput& out, const std::vector<std::string>& mssp_ids) {
  RunLogRow row;
  row.t = out.truth.t;
  row.true_x = out.truth.pose.x;
  row.true_y = out.truth.pose.y;
  row.true_psi = out.truth.pose.psi;
  row.true_v = out.truth.v;
  if (out.fused) {
    row.fused_x = out.fused->x;
    row.fused_y = out.fused->y;
  }
  row.estimates.assign(mssp_ids.size(), std::nullopt);
  for (const auto& est : out.received) {
    const auto it = std::find(mssp_ids.begin(), mssp_ids.end(), est.mssp_id);
    if (it != mssp_ids.end()) {
      row.estimates[static_cast<std::size_t>(it - mssp_ids.begin())] = EstimateCell{est.x, est.y, est.t_capture};
    }
  }
  row.yaw_rate_cmd = out.command.yaw_rate_cmd;
  row.v_cmd = out.command.v_cmd;
  row.phase = nodes::to_string(out.phase);
  return row;
}

bool at_rest(const nodes::VehicleNode& v) {
  return v.brain.phase == nodes::Phase::Stopped && v.plant.v < kRestSpeed;
}

void dump_frame(const fs::path& dir, std::size_t mssp_index, std::uint64_t frame_seq, const vision::Frame& frame) {
  fs::create_directories(dir);
  vision::write_pgm(frame, (dir / ("mssp" + std::to_string(mssp_index) + "_f" + std::to_string(frame_seq) + ".pgm")).string());
}

fs::path resolve_out_dir(const scenario::ScenarioConfig& cfg, const RunOptions& options) {
  fs::path out = options.out_dir.empty() ? fs::path(cfg.log.dir) : options.out_dir;
  fs::create_directories(out);
  return out;
}

void write_outputs(RunResult& result, const scenario::ScenarioConfig& cfg) {
  const double t_end = result.log.rows.empty() ? 0.0 : result.log.rows.back().t + cfg.dt;
  write_latency_csv(result.latency, result.out_dir / "latency.csv");
  write_net_rates(result.latency, t_end, kRateWindow, result.out_dir / "net_rates.csv");
  result.summary = summarize(result.log, result.latency);
  result.summary["mode"] = scenario::to_string(cfg.mode);
  result.summary["seed"] = cfg.seed;
  std::ofstream(result.out_dir / cfg.log.summary) << result.summary.dump(2) << '\n';
}

void sleep_until_monotonic(double t) {
  const double now = monotonic_seconds();
  if (t > now) {
    std::this_thread::sleep_for(std::chrono::duration<double>(t - now));
  }
}

}  // namespace

double monotonic_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void request_node_stop() { g_stop_requested.store(true); }

RunResult run_scenario(const scenario::ScenarioConfig& cfg, const RunOptions& options) {
  return cfg.mode == scenario::Mode::Lockstep ? run_lockstep(cfg, options) : run_distributed(cfg, options);
}

// ---------------------------------------------------------------------------
// Lockstep: one clock, one thread, every node advanced in a fixed order.

RunResult run_lockstep(const scenario::ScenarioConfig& cfg_in, const RunOptions& options) {
  auto cfg = cfg_in;
  cfg.link.seed = cfg.seed;
  scenario::validate(cfg);

  RunResult result;
  result.out_dir = resolve_out_dir(cfg, options);
  std::ofstream(result.out_dir / "scenario.json") << scenario::to_json(cfg) << '\n';

  netbus::SimNetwork net(cfg.link);
  auto vehicle = nodes::make_vehicle_node(cfg);
  auto vehicle_link = net.endpoint(vehicle.id);
  std::vector<nodes::MsspNode> mssps;
  std::vector<std::unique_ptr<netbus::Transport>> mssp_links;
  for (std::size_t i = 0; i < cfg.cameras.size(); ++i) {
    mssps.push_back(nodes::make_mssp_node(cfg, i));
    mssp_links.push_back(net.endpoint(mssps.back().id));
  }

  result.log.meta = make_meta(cfg);
  const double frame_period = 1.0 / cfg.frame_rate;
  std::uint64_t ctrl_tick = 0;
  std::uint64_t frame_tick = 0;
  while (true) {
    const double t_ctrl = static_cast<double>(ctrl_tick) * cfg.dt;
    const double t_frame = static_cast<double>(frame_tick) * frame_period;
    if (t_ctrl <= t_frame + kTickEps) {
      if (t_ctrl >= cfg.duration_cap - kTickEps) {
        break;
      }
      const auto inbox = vehicle_link->drain(t_ctrl);
      const auto out = nodes::vehicle_step(vehicle, t_ctrl, inbox);
      for (const auto& m : mssps) {
        vehicle_link->send(m.id, out.pose);
      }
      result.log.rows.push_back(make_row(out, result.log.meta.mssp_ids));
      ++ctrl_tick;
      if (at_rest(vehicle)) {
        break;
      }
    } else {
      for (std::size_t i = 0; i < mssps.size(); ++i) {
        const auto inbox = mssp_links[i]->drain(t_frame);
        const auto out = nodes::mssp_step(mssps[i], t_frame, inbox, options.dump_frames);
        for (const auto& est : out.estimates) {
          mssp_links[i]->send(vehicle.id, est);
        }
        if (out.frame) {
          dump_frame(result.out_dir / "frames", i + 1, frame_tick, *out.frame);
        }
      }
      ++frame_tick;
    }
  }

  write_run_log(result.log, result.out_dir / cfg.log.run_log);
  result.latency = net.metrics().samples;
  write_outputs(result, cfg);
  return result;
}

// ---------------------------------------------------------------------------
// Distributed: one OS process per node, real sockets, wall-clock pacing.

namespace {

struct Child {
  std::string name;
  pid_t pid{-1};
  int status{0};
  bool exited{false};
};

Child spawn_node(const std::string& exe, const std::vector<std::string>& args, const fs::path& log_path,
                 const std::string& name) {
  std::vector<std::string> argv_store{exe};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) {
    argv.push_back(a.data());
  }
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  const std::string log_str = log_path.string();
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_str.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  Child child{name};
  const int rc = posix_spawn(&child.pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw RuntimeFailure("cannot spawn node '" + name + "' from '" + exe + "'");
  }
  return child;
}

bool wait_child(Child& c, double deadline) {
  while (!c.exited) {
    const pid_t r = ::waitpid(c.pid, &c.status, WNOHANG);
    if (r == c.pid) {
      c.exited = true;
      break;
    }
    if (r < 0) {
      c.exited = true;
      c.status = -1;
      break;
    }
    if (monotonic_seconds() > deadline) {
      return false;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return true;
}

bool child_ok(const Child& c) { return c.exited && c.status >= 0 && WIFEXITED(c.status) && WEXITSTATUS(c.status) == 0; }

}  // namespace

RunResult run_distributed(const scenario::ScenarioConfig& cfg_in, const RunOptions& options) {
  auto cfg = cfg_in;
  cfg.mode = scenario::Mode::Distributed;
  cfg.link.seed = cfg.seed;
  scenario::validate(cfg);
  if (options.node_executable.empty()) {
    throw ValidationError("distributed mode needs the node executable path");
  }

  RunResult result;
  result.out_dir = resolve_out_dir(cfg, options);
  const fs::path scenario_path = result.out_dir / "scenario.json";
  std::ofstream(scenario_path) << scenario::to_json(cfg) << '\n';

  const double epoch = monotonic_seconds() + 1.0;
  auto common = [&](std::vector<std::string> args) {
    args.insert(args.end(), {"--scenario", scenario_path.string(), "--epoch", format_double(epoch), "--out",
                             result.out_dir.string()});
    if (options.dump_frames) {
      args.emplace_back("--dump-frames");
    }
    return args;
  };

  std::vector<Child> mssps;
  for (std::size_t i = 1; i <= cfg.cameras.size(); ++i) {
    mssps.push_back(spawn_node(options.node_executable,
                               common({"node", "--role", "mssp", "--id", std::to_string(i)}),
                               result.out_dir / (cfg.cameras[i - 1].id + ".log"), cfg.cameras[i - 1].id));
  }
  Child vehicle = spawn_node(options.node_executable, common({"node", "--role", "vehicle"}),
                             result.out_dir / (nodes::kVehicleId + ".log"), nodes::kVehicleId);

  const bool vehicle_done = wait_child(vehicle, epoch + cfg.duration_cap + 30.0);
  if (!vehicle_done) {
    ::kill(vehicle.pid, SIGKILL);
    wait_child(vehicle, monotonic_seconds() + 5.0);
  }
  for (auto& m : mssps) {
    if (!m.exited) {
      ::kill(m.pid, SIGTERM);
    }
  }
  for (auto& m : mssps) {
    if (!wait_child(m, monotonic_seconds() + 5.0)) {
      ::kill(m.pid, SIGKILL);
      wait_child(m, monotonic_seconds() + 5.0);
    }
  }

  std::vector<std::string> failed;
  if (!vehicle_done || !child_ok(vehicle)) {
    failed.push_back(vehicle.name);
  }
  for (const auto& m : mssps) {
    if (!child_ok(m)) {
      failed.push_back(m.name);
    }
  }

  const fs::path run_log_path = result.out_dir / cfg.log.run_log;
  if (fs::exists(run_log_path)) {
    result.log = read_run_log(run_log_path);
  } else {
    result.log.meta = make_meta(cfg);
  }
  std::vector<std::string> nodes_ids{nodes::kVehicleId};
  for (const auto& c : cfg.cameras) {
    nodes_ids.push_back(c.id);
  }
  for (const auto& id : nodes_ids) {
    const fs::path p = result.out_dir / ("latency_" + id + ".csv");
    if (fs::exists(p)) {
      auto part = read_latency_csv(p);
      result.latency.insert(result.latency.end(), part.begin(), part.end());
    }
  }
  std::stable_sort(result.latency.begin(), result.latency.end(),
                   [](const auto& a, const auto& b) { return a.t_received < b.t_received; });
  write_outputs(result, cfg);

  if (!failed.empty()) {
    result.partial = true;
    result.failure = "node process failed:";
    for (const auto& f : failed) {
      result.failure += " " + f;
    }
  }
  return result;
}

void run_node(const scenario::ScenarioConfig& cfg, NodeRole role, std::size_t mssp_index, double epoch,
              const fs::path& out_dir, bool dump_frames) {
  scenario::validate(cfg);
  g_stop_requested.store(false);
  if (epoch < 0.0) {
    epoch = monotonic_seconds() + 1.0;
  }
  fs::create_directories(out_dir);
  auto clock = [epoch] { return monotonic_seconds() - epoch; };

  if (role == NodeRole::Vehicle) {
    std::map<std::string, netbus::UdpPeer> peers;
    for (std::size_t i = 0; i < cfg.cameras.size(); ++i) {
      peers[cfg.cameras[i].id] = {cfg.host_for(cfg.cameras[i].id), cfg.port_for(i + 1)};
    }
    netbus::UdpTransport transport(nodes::kVehicleId, {cfg.host_for(nodes::kVehicleId), cfg.port_for(0)}, peers,
                                   clock);
    auto vehicle = nodes::make_vehicle_node(cfg);
    RunLog log;
    log.meta = make_meta(cfg);
    for (std::uint64_t k = 0;; ++k) {
      const double t = static_cast<double>(k) * cfg.dt;
      if (t >= cfg.duration_cap - kTickEps || g_stop_requested.load()) {
        break;
      }
      sleep_until_monotonic(epoch + t);
      const auto inbox = transport.drain(t);
      const auto out = nodes::vehicle_step(vehicle, t, inbox);
      for (const auto& c : cfg.cameras) {
        transport.send(c.id, out.pose);
      }
      log.rows.push_back(make_row(out, log.meta.mssp_ids));
      if (at_rest(vehicle)) {
        break;
      }
    }
    write_run_log(log, out_dir / cfg.log.run_log);
    write_latency_csv(transport.metrics().samples, out_dir / ("latency_" + nodes::kVehicleId + ".csv"));
    return;
  }

  if (mssp_index < 1 || mssp_index > cfg.cameras.size()) {
    throw ValidationError("MSSP id must be between 1 and " + std::to_string(cfg.cameras.size()));
  }
  auto node = nodes::make_mssp_node(cfg, mssp_index - 1);
  netbus::UdpTransport transport(node.id, {cfg.host_for(node.id), cfg.port_for(mssp_index)},
                                 {{nodes::kVehicleId, {cfg.host_for(nodes::kVehicleId), cfg.port_for(0)}}}, clock);
  // Runs until told to stop; the cap only guards against an orphaned node.
  const double hard_stop = cfg.duration_cap + 10.0;
  for (std::uint64_t j = 0;; ++j) {
    const double t = static_cast<double>(j) * node.frame_period;
    if (t > hard_stop || g_stop_requested.load()) {
      break;
    }
    sleep_until_monotonic(epoch + t);
    if (g_stop_requested.load()) {
      break;
    }
    const auto inbox = transport.drain(t);
    const auto out = nodes::mssp_step(node, t, inbox, dump_frames);
    for (const auto& est : out.estimates) {
      transport.send(nodes::kVehicleId, est);
    }
    if (out.frame) {
      dump_frame(out_dir / "frames", mssp_index, j, *out.frame);
    }
  }
  write_latency_csv(transport.metrics().samples, out_dir / ("latency_" + node.id + ".csv"));
}

// ---------------------------------------------------------------------------

CompareReport compare_runs(const RunLog& a, const RunLog& b) {
  const auto& pa = a.meta.plan;
  const auto& pb = b.meta.plan;
  const bool same_plan = pa.size() == pb.size() && std::equal(pa.begin(), pa.end(), pb.begin(), [](auto& p, auto& q) {
                           return std::abs(p.x - q.x) < 1e-9 && std::abs(p.y - q.y) < 1e-9;
                         });
  if (!same_plan) {
    throw ValidationError("runs use different waypoint plans");
  }
  if (a.rows.empty() || b.rows.empty()) {
    throw ValidationError("cannot compare an empty run log");
  }
  CompareReport report;
  report.t_begin = std::max(a.rows.front().t, b.rows.front().t);
  report.t_end = std::min(a.rows.back().t, b.rows.back().t);
  if (report.t_begin > report.t_end) {
    throw ValidationError("run logs cover disjoint time ranges");
  }
  double sum_sq = 0.0;
  for (const auto& r : a.rows) {
    if (r.t < report.t_begin || r.t > report.t_end) {
      continue;
    }
    const auto q = truth_at(b, r.t);
    const double d = std::hypot(r.true_x - q.x, r.true_y - q.y);
    report.max_diff = std::max(report.max_diff, d);
    sum_sq += d * d;
    ++report.samples;
  }
  report.rms_diff = report.samples ? std::sqrt(sum_sq / static_cast<double>(report.samples)) : 0.0;
  return report;
}

nlohmann::json to_json(const CompareReport& report) {
  return {{"samples", report.samples},
          {"t_begin", report.t_begin},
          {"t_end", report.t_end},
          {"max_diff", report.max_diff},
          {"rms_diff", report.rms_diff}};
}

void export_plot_data(const RunLog& log, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto& ids = log.meta.mssp_ids;
  {
    std::ofstream out(out_dir / "truth_vs_estimates.csv", std::ios::binary);
    if (!out) {
      throw IoError("cannot write to '" + out_dir.string() + "'");
    }
    out << "#schema=" << kSchemaVersion << ";truth_vs_estimates\n";
    out << "t,true_x,true_y,true_psi";
    for (const auto& id : ids) {
      out << ',' << id << "_x," << id << "_y";
    }
    out << ",fused_x,fused_y\n";
    for (const auto& r : log.rows) {
      out << format_double(r.t) << ',' << format_double(r.true_x) << ',' << format_double(r.true_y) << ','
          << format_double(r.true_psi);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& e = i < r.estimates.size() ? r.estimates[i] : std::nullopt;
        out << ',' << (e ? format_double(e->x) : "") << ',' << (e ? format_double(e->y) : "");
      }
      out << ',' << (r.fused_x ? format_double(*r.fused_x) : "") << ','
          << (r.fused_y ? format_double(*r.fused_y) : "") << '\n';
    }
  }
  {
    std::ofstream out(out_dir / "closed_loop.csv", std::ios::binary);
    out << "#schema=" << kSchemaVersion << ";closed_loop\n";
    out << "t,true_x,true_y,desired_x,desired_y,cross_track\n";
    const auto& plan = log.meta.plan;
    for (const auto& r : log.rows) {
      // Nearest point on the planned polyline.
      control::Point2 best{r.true_x, r.true_y};
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < plan.size(); ++i) {
        const auto a = plan[i - 1];
        const auto b = plan[i];
        const double ex = b.x - a.x;
        const double ey = b.y - a.y;
        const double f = std::clamp(((r.true_x - a.x) * ex + (r.true_y - a.y) * ey) / (ex * ex + ey * ey), 0.0, 1.0);
        const control::Point2 q{a.x + f * ex, a.y + f * ey};
        const double d = std::hypot(r.true_x - q.x, r.true_y - q.y);
        if (d < best_d) {
          best_d = d;
          best = q;
        }
      }
      out << format_double(r.t) << ',' << format_double(r.true_x) << ',' << format_double(r.true_y) << ','
          << format_double(best.x) << ',' << format_double(best.y) << ','
          << format_double(plan.size() >= 2 ? best_d : 0.0) << '\n';
    }
  }
}

}  // namespace iea::harness

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

#include "core/runlog.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace iea::harness {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("malformed number '" + s + "'");
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) {
    return std::nullopt;
  }
  return parse_double(s);
}

std::string sanitize(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ';' || c == '\n' || c == '\r' || c == ','; }, '_');
  return s;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

std::ifstream open_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read '" + path.string() + "'");
  }
  return in;
}

void expect_schema(const std::string& line, const std::filesystem::path& path) {
  if (line.rfind("#schema=" + std::to_string(kSchemaVersion), 0) != 0) {
    throw ValidationError("'" + path.string() + "' is not a schema=1 file");
  }
}

double rms(double sum_sq, std::size_t n) { return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n)); }

nlohmann::json or_null(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return {buf.data(), res.ptr};
}

void write_run_log(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  const auto& m = log.meta;
  out << "#schema=" << kSchemaVersion << ";name=" << sanitize(m.name) << ";dt=" << format_double(m.dt)
      << ";v_cruise=" << format_double(m.v_cruise) << ";mssps=";
  for (std::size_t i = 0; i < m.mssp_ids.size(); ++i) {
    out << (i ? "|" : "") << sanitize(m.mssp_ids[i]);
  }
  out << ";plan=";
  for (std::size_t i = 0; i < m.plan.size(); ++i) {
    out << (i ? "|" : "") << format_double(m.plan[i].x) << ' ' << format_double(m.plan[i].y);
  }
  out << '\n';

  out << "t,true_x,true_y,true_psi,true_v,fused_x,fused_y";
  for (const auto& id : m.mssp_ids) {
    out << ',' << id << "_x," << id << "_y," << id << "_tcap";
  }
  out << ",yaw_rate_cmd,v_cmd,phase\n";

  for (const auto& r : log.rows) {
    out << format_double(r.t) << ',' << format_double(r.true_x) << ',' << format_double(r.true_y) << ','
        << format_double(r.true_psi) << ',' << format_double(r.true_v) << ',' << opt(r.fused_x) << ','
        << opt(r.fused_y);
    for (std::size_t i = 0; i < m.mssp_ids.size(); ++i) {
      const auto& e = i < r.estimates.size() ? r.estimates[i] : std::nullopt;
      if (e) {
        out << ',' << format_double(e->x) << ',' << format_double(e->y) << ',' << format_double(e->t_capture);
      } else {
        out << ",,,";
      }
    }
    out << ',' << format_double(r.yaw_rate_cmd) << ',' << format_double(r.v_cmd) << ',' << r.phase << '\n';
  }
  if (!out) {
    throw RuntimeFailure("write to '" + path.string() + "' failed");
  }
}

RunLog read_run_log(const std::filesystem::path& path) {
  auto in = open_csv(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("'" + path.string() + "' is empty");
  }
  expect_schema(line, path);
  RunLog log;
  for (const auto& field : split(line.substr(1), ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      continue;
    }
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "name") {
      log.meta.name = value;
    } else if (key == "dt") {
      log.meta.dt = parse_double(value);
    } else if (key == "v_cruise") {
      log.meta.v_cruise = parse_double(value);
    } else if (key == "mssps" && !value.empty()) {
      log.meta.mssp_ids = split(value, '|');
    } else if (key == "plan" && !value.empty()) {
      for (const auto& pt : split(value, '|')) {
        const auto xy = split(pt, ' ');
        if (xy.size() != 2) {
          throw ValidationError("malformed plan point '" + pt + "'");
        }
        log.meta.plan.push_back({parse_double(xy[0]), parse_double(xy[1])});
      }
    }
  }
  if (!std::getline(in, line)) {
    throw ValidationError("'" + path.string() + "' has no header row");
  }
  const std::size_t n_mssp = log.meta.mssp_ids.size();
  const std::size_t n_cols = 7 + 3 * n_mssp + 3;
  if (split(line, ',').size() != n_cols) {
    throw ValidationError("run log header does not match its metadata");
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto c = split(line, ',');
    if (c.size() != n_cols) {
      throw ValidationError("run log row has " + std::to_string(c.size()) + " columns, expected " +
                            std::to_string(n_cols));
    }
    RunLogRow r;
    r.t = parse_double(c[0]);
    r.true_x = parse_double(c[1]);
    r.true_y = parse_double(c[2]);
    r.true_psi = parse_double(c[3]);
    r.true_v = parse_double(c[4]);
    r.fused_x = parse_optional(c[5]);
    r.fused_y = parse_optional(c[6]);
    for (std::size_t i = 0; i < n_mssp; ++i) {
      const auto x = parse_optional(c[7 + 3 * i]);
      const auto y = parse_optional(c[8 + 3 * i]);
      const auto tc = parse_optional(c[9 + 3 * i]);
      if (x && y && tc) {
        r.estimates.push_back(EstimateCell{*x, *y, *tc});
      } else {
        r.estimates.push_back(std::nullopt);
      }
    }
    r.yaw_rate_cmd = parse_double(c[n_cols - 3]);
    r.v_cmd = parse_double(c[n_cols - 2]);
    r.phase = c[n_cols - 1];
    if (!log.rows.empty() && !(r.t > log.rows.back().t)) {
      throw ValidationError("run log times are not strictly increasing");
    }
    log.rows.push_back(std::move(r));
  }
  return log;
}

void write_latency_csv(const std::vector<netbus::LatencySample>& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  out << "#schema=" << kSchemaVersion << ";latency\n";
  out << "t_received,link,kind,bytes,latency\n";
  for (const auto& s : samples) {
    out << format_double(s.t_received) << ',' << s.link << ','
        << (s.kind == netbus::MessageKind::Pose ? "pose" : "est") << ',' << s.bytes << ',' << format_double(s.latency)
        << '\n';
  }
}

std::vector<netbus::LatencySample> read_latency_csv(const std::filesystem::path& path) {
  auto in = open_csv(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("'" + path.string() + "' is empty");
  }
  expect_schema(line, path);
  std::getline(in, line);
  std::vector<netbus::LatencySample> out;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto c = split(line, ',');
    if (c.size() != 5) {
      throw ValidationError("malformed latency row");
    }
    out.push_back({parse_double(c[0]), c[1], c[2] == "pose" ? netbus::MessageKind::Pose : netbus::MessageKind::Estimate,
                   static_cast<std::size_t>(parse_double(c[3])), parse_double(c[4])});
  }
  return out;
}

void write_net_rates(const std::vector<netbus::LatencySample>& samples, double t_end, double window,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  out << "#schema=" << kSchemaVersion << ";net_rates;window=" << format_double(window) << '\n';
  out << "window_end,link,packets_per_s,bytes_per_s\n";
  netbus::NetMetrics m;
  m.samples = samples;
  std::vector<std::string> links;
  for (const auto& s : samples) {
    if (std::find(links.begin(), links.end(), s.link) == links.end()) {
      links.push_back(s.link);
    }
  }
  std::sort(links.begin(), links.end());
  const auto windows = static_cast<std::size_t>(std::ceil(t_end / window - 1e-9));
  for (std::size_t k = 1; k <= windows; ++k) {
    const double end = static_cast<double>(k) * window;
    const auto report = netbus::metrics_window(m, window, end);
    for (const auto& link : links) {
      const auto it = std::find_if(report.links.begin(), report.links.end(),
                                   [&](const netbus::LinkRate& r) { return r.link == link; });
      const double pps = it == report.links.end() ? 0.0 : it->packets_per_s;
      const double bps = it == report.links.end() ? 0.0 : it->bytes_per_s;
      out << format_double(end) << ',' << link << ',' << format_double(pps) << ',' << format_double(bps) << '\n';
    }
  }
}

control::Point2 truth_at(const RunLog& log, double t) {
  const auto& rows = log.rows;
  if (rows.empty()) {
    throw ValidationError("empty run log");
  }
  if (t <= rows.front().t) {
    return {rows.front().true_x, rows.front().true_y};
  }
  if (t >= rows.back().t) {
    return {rows.back().true_x, rows.back().true_y};
  }
  const auto it = std::upper_bound(rows.begin(), rows.end(), t, [](double v, const RunLogRow& r) { return v < r.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return {a.true_x + f * (b.true_x - a.true_x), a.true_y + f * (b.true_y - a.true_y)};
}

nlohmann::json summarize(const RunLog& log, const std::vector<netbus::LatencySample>& latency) {
  using nlohmann::json;
  const auto& rows = log.rows;
  json s;
  s["schema"] = kSchemaVersion;
  s["scenario"] = log.meta.name;
  s["rows"] = rows.size();
  const double duration = rows.empty() ? 0.0 : rows.back().t - rows.front().t + log.meta.dt;
  s["duration"] = duration;
  s["end_phase"] = rows.empty() ? std::string{} : rows.back().phase;

  std::optional<double> first_fix;
  for (const auto& r : rows) {
    if (r.fused_x) {
      first_fix = r.t;
      break;
    }
  }
  s["first_fix_time"] = or_null(first_fix);

  // Cross-track error after settling.
  {
    double sum_sq = 0.0;
    double max_err = 0.0;
    std::size_t n = 0;
    if (first_fix && log.meta.plan.size() >= 2) {
      for (const auto& r : rows) {
        if (r.t < *first_fix + kSettleAfterFix) {
          continue;
        }
        const double e = control::cross_track_distance(log.meta.plan, {r.true_x, r.true_y});
        sum_sq += e * e;
        max_err = std::max(max_err, e);
        ++n;
      }
    }
    s["cross_track"] = {{"samples", n},
                        {"rms", n ? json(rms(sum_sq, n)) : json(nullptr)},
                        {"max", n ? json(max_err) : json(nullptr)},
                        {"settle_time", first_fix ? json(*first_fix + kSettleAfterFix) : json(nullptr)}};
  }

  // Overshoot beyond the final lane, in the direction of the lateral move.
  {
    double overshoot = 0.0;
    if (first_fix && log.meta.plan.size() >= 2) {
      const double y_final = log.meta.plan.back().y;
      const double dy = y_final - log.meta.plan.front().y;
      const double sign = dy > 0.0 ? 1.0 : (dy < 0.0 ? -1.0 : 0.0);
      for (const auto& r : rows) {
        if (r.t < *first_fix) {
          continue;
        }
        const double dev = sign == 0.0 ? std::abs(r.true_y - y_final) : sign * (r.true_y - y_final);
        overshoot = std::max(overshoot, dev);
      }
    }
    s["overshoot"] = overshoot;
  }

  // Per-MSSP estimate error against truth at capture time.
  {
    json per = json::object();
    for (std::size_t i = 0; i < log.meta.mssp_ids.size(); ++i) {
      double sum_sq = 0.0;
      double max_err = 0.0;
      std::size_t n = 0;
      for (const auto& r : rows) {
        if (i >= r.estimates.size() || !r.estimates[i]) {
          continue;
        }
        const auto& e = *r.estimates[i];
        const auto truth = truth_at(log, e.t_capture);
        const double err = std::hypot(e.x - truth.x, e.y - truth.y);
        sum_sq += err * err;
        max_err = std::max(max_err, err);
        ++n;
      }
      per[log.meta.mssp_ids[i]] = {{"count", n},
                                   {"rms", n ? json(rms(sum_sq, n)) : json(nullptr)},
                                   {"max", n ? json(max_err) : json(nullptr)}};
    }
    s["estimates"] = per;
  }

  // Fused-output continuity.
  {
    double max_jump = 0.0;
    std::size_t decreases = 0;
    std::size_t gaps = 0;
    const RunLogRow* prev = nullptr;
    for (const auto& r : rows) {
      if (!r.fused_x) {
        if (first_fix && r.t > *first_fix) {
          ++gaps;
        }
        prev = nullptr;
        continue;
      }
      if (prev != nullptr) {
        max_jump = std::max(max_jump, std::hypot(*r.fused_x - *prev->fused_x, *r.fused_y - *prev->fused_y));
        if (*r.fused_x < *prev->fused_x) {
          ++decreases;
        }
      }
      prev = &r;
    }
    s["fused"] = {{"max_jump", max_jump}, {"x_decreases", decreases}, {"gap_rows", gaps}};
  }

  // Network.
  {
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_link;
    std::vector<double> lat;
    lat.reserve(latency.size());
    for (const auto& l : latency) {
      auto& [packets, bytes] = per_link[l.link];
      ++packets;
      bytes += l.bytes;
      lat.push_back(l.latency);
    }
    json links = json::object();
    for (const auto& [link, pb] : per_link) {
      links[link] = {{"packets", pb.first},
                     {"bytes", pb.second},
                     {"packets_per_s", duration > 0.0 ? pb.first / duration : 0.0},
                     {"bytes_per_s", duration > 0.0 ? pb.second / duration : 0.0}};
    }
    json lat_json{{"count", lat.size()}};
    if (!lat.empty()) {
      lat_json["min"] = *std::min_element(lat.begin(), lat.end());
      lat_json["p50"] = netbus::percentile(lat, 0.50);
      lat_json["p95"] = netbus::percentile(lat, 0.95);
      lat_json["max"] = *std::max_element(lat.begin(), lat.end());
    } else {
      lat_json["min"] = lat_json["p50"] = lat_json["p95"] = lat_json["max"] = nullptr;
    }
    s["network"] = {{"links", links}, {"latency", lat_json}};
  }
  return s;
}

}  // namespace iea::harness

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

#include "core/vision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "core/error.hpp"

namespace iea::vision {

using geometry::PixelPoint;
using geometry::WorldPoint;

std::vector<WorldPoint> vehicle_corners(const geometry::Pose2D& pose, const VehicleDims& dims) {
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);
  const double hl = 0.5 * dims.length;
  const double hw = 0.5 * dims.width;
  constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  std::vector<WorldPoint> out;
  out.reserve(4);
  for (const auto& [sl, sw] : signs) {
    const double lx = sl * hl;
    const double ly = sw * hw;
    out.push_back({pose.x + c * lx - s * ly, pose.y + s * lx + c * ly, 0.0});
  }
  return out;
}

Frame render_frame(const geometry::CameraModel& camera, const geometry::Pose2D& vehicle, const VehicleDims& dims,
                   double t) {
  Frame frame{camera.width, camera.height,
              std::vector<std::uint8_t>(static_cast<std::size_t>(camera.width) * camera.height, kBackgroundIntensity),
              t};

  std::array<PixelPoint, 4> quad;
  const auto corners = vehicle_corners(vehicle, dims);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto px = geometry::project(camera, corners[i]);
    if (!px) {
      return frame;
    }
    quad[i] = *px;
  }

  double u_lo = std::numeric_limits<double>::infinity();
  double v_lo = u_lo;
  double u_hi = -u_lo;
  double v_hi = -u_lo;
  for (const auto& q : quad) {
    u_lo = std::min(u_lo, q.u);
    u_hi = std::max(u_hi, q.u);
    v_lo = std::min(v_lo, q.v);
    v_hi = std::max(v_hi, q.v);
  }
  const int c0 = std::max(0, static_cast<int>(std::ceil(u_lo)));
  const int c1 = std::min(camera.width - 1, static_cast<int>(std::floor(u_hi)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(v_lo)));
  const int r1 = std::min(camera.height - 1, static_cast<int>(std::floor(v_hi)));
  if (c0 > c1 || r0 > r1) {
    return frame;
  }

  // Convex quad; accept either winding.
  auto inside = [&quad](double u, double v) {
    bool has_neg = false;
    bool has_pos = false;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& a = quad[i];
      const auto& b = quad[(i + 1) % 4];
      const double cross = (b.u - a.u) * (v - a.v) - (b.v - a.v) * (u - a.u);
      has_neg = has_neg || cross < 0.0;
      has_pos = has_pos || cross > 0.0;
    }
    return !(has_neg && has_pos);
  };

  for (int r = r0; r <= r1; ++r) {
    auto* row = frame.pixels.data() + static_cast<std::size_t>(r) * frame.width;
    for (int c = c0; c <= c1; ++c) {
      if (inside(c, r)) {
        row[c] = kVehicleIntensity;
      }
    }
  }
  return frame;
}

void add_pixel_noise(Frame& frame, double sigma, std::mt19937_64& rng) {
  if (!(sigma > 0.0)) {
    return;
  }
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& p : frame.pixels) {
    const double v = std::round(p + noise(rng));
    p = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
}

std::vector<Component> foreground_components(const Frame& background, const Frame& current, int threshold) {
  if (background.width != current.width || background.height != current.height ||
      background.pixels.size() != current.pixels.size()) {
    throw ValidationError("background and current frame dimensions differ");
  }
  const int w = current.width;
  const int h = current.height;
  const std::size_t n = current.pixels.size();

  // 0 = background, 1 = unvisited foreground, 2 = labelled
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(int{current.pixels[i]} - int{background.pixels[i]}) > threshold) {
      mask[i] = 1;
    }
  }

  std::vector<Component> out;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (mask[seed] != 1) {
      continue;
    }
    Component comp;
    const int seed_c = static_cast<int>(seed % w);
    const int seed_r = static_cast<int>(seed / w);
    comp.box = {seed_c, seed_r, seed_c, seed_r};
    double sum_u = 0.0;
    double sum_v = 0.0;
    mask[seed] = 2;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int c = static_cast<int>(idx % w);
      const int r = static_cast<int>(idx / w);
      ++comp.area;
      sum_u += c;
      sum_v += r;
      comp.box.u_min = std::min(comp.box.u_min, c);
      comp.box.u_max = std::max(comp.box.u_max, c);
      comp.box.v_min = std::min(comp.box.v_min, r);
      comp.box.v_max = std::max(comp.box.v_max, r);
      auto visit = [&](std::size_t j) {
        if (mask[j] == 1) {
          mask[j] = 2;
          stack.push_back(j);
        }
      };
      if (c > 0) visit(idx - 1);
      if (c + 1 < w) visit(idx + 1);
      if (r > 0) visit(idx - w);
      if (r + 1 < h) visit(idx + w);
    }
    comp.centroid_u = sum_u / comp.area;
    comp.centroid_v = sum_v / comp.area;
    comp.touches_border = comp.box.u_min == 0 || comp.box.v_min == 0 || comp.box.u_max == w - 1 || comp.box.v_max == h - 1;
    out.push_back(comp);
  }
  return out;
}

std::optional<BoundingBox> detect_by_subtraction(const Frame& background, const Frame& current, int threshold,
                                                 int min_area) {
  const auto comps = foreground_components(background, current, threshold);
  const Component* best = nullptr;
  for (const auto& c : comps) {
    if (c.area >= min_area && (best == nullptr || c.area > best->area)) {
      best = &c;
    }
  }
  if (best == nullptr) {
    return std::nullopt;
  }
  return best->box;
}

std::optional<Detection> track_step(TrackerState& state, const Frame& frame, const TrackerParams& params) {
  if (!state.background) {
    state.background = frame;
    return std::nullopt;
  }

  const auto comps = foreground_components(*state.background, frame, params.threshold);
  auto usable = [&params](const Component& c) {
    return c.area >= params.min_area && !(params.reject_border && c.touches_border);
  };

  const Component* chosen = nullptr;
  if (state.mode == TrackerMode::Searching) {
    for (const auto& c : comps) {
      if (usable(c) && (chosen == nullptr || c.area > chosen->area)) {
        chosen = &c;
      }
    }
  } else {
    const auto prev = state.last_box->center();
    double best = params.gate_px;
    for (const auto& c : comps) {
      if (!usable(c)) {
        continue;
      }
      const double d = std::hypot(c.centroid_u - prev.u, c.centroid_v - prev.v);
      if (d <= best) {
        best = d;
        chosen = &c;
      }
    }
  }

  if (chosen == nullptr) {
    if (state.mode == TrackerMode::Tracking && ++state.frames_lost > params.max_frames_lost) {
      state.mode = TrackerMode::Searching;
      state.last_box.reset();
      state.frames_lost = 0;
    }
    return std::nullopt;
  }

  state.mode = TrackerMode::Tracking;
  state.last_box = chosen->box;
  state.frames_lost = 0;
  return Detection{chosen->box, chosen->box.center(), frame.capture_time};
}

void write_pgm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw RuntimeFailure("cannot open " + path);
  }
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
}

}  // namespace iea::vision

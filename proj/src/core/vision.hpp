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

// Synthetic overhead frames, background subtraction and a gated
// nearest-blob tracker.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace iea::vision {

inline constexpr std::uint8_t kBackgroundIntensity = 40;
inline constexpr std::uint8_t kVehicleIntensity = 220;

struct Frame {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> pixels;  // row-major
  double capture_time{0.0};

  std::uint8_t at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct BoundingBox {
  int u_min{0};
  int v_min{0};
  int u_max{0};
  int v_max{0};

  geometry::PixelPoint center() const { return {0.5 * (u_min + u_max), 0.5 * (v_min + v_max)}; }
  bool operator==(const BoundingBox&) const = default;
};

struct VehicleDims {
  double length{4.5};
  double width{1.8};
};

/// One 4-connected foreground region.
struct Component {
  BoundingBox box;
  int area{0};
  double centroid_u{0.0};
  double centroid_v{0.0};
  bool touches_border{false};
};

struct Detection {
  BoundingBox box;
  geometry::PixelPoint center;
  double capture_time{0.0};
};

struct TrackerParams {
  int threshold{30};
  int min_area{25};
  double gate_px{80.0};
  int max_frames_lost{5};
  // Components cut by the image border give a biased centre; they are not
  // accepted as detections.
  bool reject_border{true};
};

enum class TrackerMode { Searching, Tracking };

struct TrackerState {
  TrackerMode mode{TrackerMode::Searching};
  std::optional<BoundingBox> last_box;
  std::optional<Frame> background;
  int frames_lost{0};
};

/// Ground-plane corners of the vehicle footprint, counter-clockwise.
std::vector<geometry::WorldPoint> vehicle_corners(const geometry::Pose2D& pose, const VehicleDims& dims);

/// Flat background with the vehicle's ground rectangle painted in. A vehicle
/// with any corner behind the camera is not drawn.
Frame render_frame(const geometry::CameraModel& camera, const geometry::Pose2D& vehicle, const VehicleDims& dims,
                   double t);

/// Additive Gaussian pixel noise, clamped to [0, 255]. No-op for sigma <= 0.
void add_pixel_noise(Frame& frame, double sigma, std::mt19937_64& rng);

/// All 4-connected components of |current - background| > threshold, in
/// raster order of their first pixel. Throws ValidationError on size mismatch.
std::vector<Component> foreground_components(const Frame& background, const Frame& current, int threshold);

/// Tight box of the largest component with area >= min_area.
std::optional<BoundingBox> detect_by_subtraction(const Frame& background, const Frame& current, int threshold = 30,
                                                 int min_area = 25);

/// Advances the Searching/Tracking state machine by one frame. The first
/// frame seen becomes the background. Losing the target for more than
/// max_frames_lost frames drops back to Searching but keeps that background:
/// the frame after a loss usually still shows part of the vehicle.
std::optional<Detection> track_step(TrackerState& state, const Frame& frame, const TrackerParams& params = {});

/// Binary PGM (P5).
void write_pgm(const Frame& frame, const std::string& path);

}  // namespace iea::vision

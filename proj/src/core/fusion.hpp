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

// Driving-cell management: keep the latest estimate per MSSP, expire stale
// ones, average whatever is left.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace iea::fusion {

struct PositionEstimate {
  std::string mssp_id;
  double x{0.0};
  double y{0.0};
  double t_capture{0.0};
  double t_received{0.0};
  std::uint64_t seq{0};
};

struct FusedFix {
  double x{0.0};
  double y{0.0};
  double t{0.0};
  int sources{0};
};

struct FusionState {
  std::map<std::string, PositionEstimate> latest;
  std::map<std::string, std::uint64_t> last_seq;
  double staleness_timeout{0.25};
  std::optional<FusedFix> last_output;
  std::uint64_t dropped{0};
};

/// Stores est iff its seq exceeds every seq already seen from that MSSP.
/// Returns false (and counts a drop) otherwise.
bool ingest(FusionState& state, const PositionEstimate& est);

/// Discards estimates older than the staleness timeout, then averages the
/// survivors with equal weight.
std::optional<FusedFix> fuse(FusionState& state, double now);

}  // namespace iea::fusion

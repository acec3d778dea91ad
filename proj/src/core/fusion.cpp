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

#include "core/fusion.hpp"

namespace iea::fusion {

bool ingest(FusionState& state, const PositionEstimate& est) {
  const auto it = state.last_seq.find(est.mssp_id);
  if (it != state.last_seq.end() && est.seq <= it->second) {
    ++state.dropped;
    return false;
  }
  state.last_seq[est.mssp_id] = est.seq;
  state.latest[est.mssp_id] = est;
  return true;
}

std::optional<FusedFix> fuse(FusionState& state, double now) {
  std::erase_if(state.latest,
                [&](const auto& kv) { return now - kv.second.t_received > state.staleness_timeout; });
  if (state.latest.empty()) {
    return std::nullopt;
  }
  // Running mean: identical inputs come back bit-exact and the result never
  // leaves the inputs' range through rounding.
  FusedFix fix{0.0, 0.0, now, 0};
  for (const auto& [id, est] : state.latest) {
    ++fix.sources;
    fix.x += (est.x - fix.x) / fix.sources;
    fix.y += (est.y - fix.y) / fix.sources;
  }
  state.last_output = fix;
  return fix;
}

}  // namespace iea::fusion

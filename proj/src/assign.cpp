// Copyright 2026 The gadet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "gadet/assign.hpp"

#include <cmath>
#include <limits>

#include "gadet/errors.hpp"

namespace gadet {

std::pair<double, double> AssignmentConfig::range(int level, int levels) const {
  const auto bound = [&](int i) -> double {  // R_i
    if (i <= 0) return 0.0;
    if (i >= levels) return std::numeric_limits<double>::infinity();
    if (!range_bounds.empty()) return range_bounds[static_cast<std::size_t>(i - 1)];
    return 4.0 * std::ldexp(1.0, i - 1);
  };
  return {bound(level), bound(level + 1)};
}

void AssignmentConfig::validate(int levels) const {
  if (!(center_radius > 0.0)) throw ConfigError("center_radius must be positive");
  if (!range_bounds.empty()) {
    if (static_cast<int>(range_bounds.size()) != levels - 1) {
      throw ConfigError("need " + std::to_string(levels - 1) + " regression range bounds, got " +
                        std::to_string(range_bounds.size()));
    }
    double prev = 0.0;
    for (double b : range_bounds) {
      if (!(b > prev)) throw ConfigError("regression range bounds must be positive and increasing");
      prev = b;
    }
  }
}

MomentTargets assign_targets(std::span<const Segment> segments, const std::vector<LevelGeometry>& geometry,
                             double feature_fps, const AssignmentConfig& cfg) {
  const int levels = static_cast<int>(geometry.size());
  cfg.validate(levels);
  MomentTargets out;
  out.levels.resize(geometry.size());
  for (int l = 0; l < levels; ++l) {
    const auto& g = geometry[static_cast<std::size_t>(l)];
    auto& lt = out.levels[static_cast<std::size_t>(l)];
    const auto n = static_cast<std::size_t>(g.valid_length);
    lt.stride = g.stride;
    lt.label.assign(n, kNegative);
    lt.segment.assign(n, kNegative);
    lt.offsets = Matrix<double>::Zero(g.valid_length, 2);
    lt.sigma_iou.assign(n, 0.0);
    const auto [lo, hi] = cfg.range(l, levels);
    const double radius_s = cfg.center_radius * g.stride / feature_fps;

    for (std::size_t i = 0; i < n; ++i) {
      const double t = feature_index_to_seconds(static_cast<double>(i) * g.stride, feature_fps);
      int best = kNegative;
      for (std::size_t k = 0; k < segments.size(); ++k) {
        const Segment& s = segments[k];
        if (!(s.start_s < t && t < s.end_s)) continue;
        if (std::abs(t - s.interval().center()) > radius_s) continue;
        const double reach = std::max(t - s.start_s, s.end_s - t) * feature_fps;
        if (!(reach > lo && reach <= hi)) continue;
        if (best == kNegative || s.duration() < segments[static_cast<std::size_t>(best)].duration()) {
          best = static_cast<int>(k);
        }
      }
      if (best == kNegative) {
        ++out.num_negative;
        continue;
      }
      const Segment& s = segments[static_cast<std::size_t>(best)];
      lt.label[i] = class_index(s.label);
      lt.segment[i] = best;
      lt.offsets(static_cast<Eigen::Index>(i), 0) = (t - s.start_s) * feature_fps / g.stride;
      lt.offsets(static_cast<Eigen::Index>(i), 1) = (s.end_s - t) * feature_fps / g.stride;
      ++out.num_positive;
    }
  }
  return out;
}

}  // namespace gadet

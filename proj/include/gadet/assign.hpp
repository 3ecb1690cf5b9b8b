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
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gadet/network.hpp"
#include "gadet/types.hpp"

namespace gadet {

/// Center sampling plus per-level regression ranges.
///
/// Level l (1-based) owns moments whose largest distance to a segment
/// boundary, in level-1 grid steps, falls in (R_{l-1}, R_l] with R_0 = 0 and
/// R_L = infinity. Overlapping candidates go to the shortest segment.
struct AssignmentConfig {
  /// R_1 .. R_{L-1}. Empty means 4, 8, 16, ... (doubling per level).
  std::vector<double> range_bounds;
  /// Max distance from the segment center, in multiples of the level stride.
  double center_radius = 1.5;

  /// Half-open interval (lo, hi] for 0-based `level` in a pyramid of `levels`.
  std::pair<double, double> range(int level, int levels) const;
  /// Throws ConfigError.
  void validate(int levels) const;
};

inline constexpr int kNegative = -1;

struct LevelTargets {
  int stride = 1;
  std::vector<int> label;              // class index, or kNegative
  std::vector<int> segment;            // index into the segment list, or kNegative
  Matrix<double> offsets;              // valid_length x 2, (d_s*, d_e*) in stride units
  std::vector<double> sigma_iou;       // per moment IoU weight, filled by total_loss
};

struct MomentTargets {
  std::vector<LevelTargets> levels;
  int num_positive = 0;
  int num_negative = 0;
  /// When set, total_loss reuses sigma_iou instead of recomputing it.
  bool sigma_frozen = false;
};

/// Moment i of a level with stride s sits at time i * s / feature_fps.
MomentTargets assign_targets(std::span<const Segment> segments, const std::vector<LevelGeometry>& geometry,
                             double feature_fps, const AssignmentConfig& cfg);

}  // namespace gadet

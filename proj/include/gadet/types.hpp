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

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>

namespace gadet {

/// Group activities annotated in the dataset. The numeric value is the
/// class channel index used by the classification head.
enum class ActivityClass : std::uint8_t { kTimeOut = 0, kStop = 1 };

inline constexpr int kNumActivityClasses = 2;

/// Manifest spelling: "time_out" / "stop".
std::string_view to_string(ActivityClass label);
/// Human-readable table spelling: "Time-out" / "StOP?".
std::string_view display_name(ActivityClass label);
/// Accepts the manifest spelling; throws ConfigError otherwise.
ActivityClass parse_activity_class(std::string_view text);
/// Inverse of the channel index; throws ConfigError when out of range.
ActivityClass activity_class_from_index(int index);

inline int class_index(ActivityClass label) { return static_cast<int>(label); }

/// Closed time interval [start, end], in whatever unit the caller uses.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  double center() const { return 0.5 * (start + end); }
};

/// Ground-truth activity instance, in seconds.
struct Segment {
  ActivityClass label = ActivityClass::kTimeOut;
  double start_s = 0.0;
  double end_s = 0.0;

  Interval interval() const { return {start_s, end_s}; }
  double duration() const { return end_s - start_s; }
};

/// Scored detection, in seconds.
struct Proposal {
  std::string video_id;
  ActivityClass label = ActivityClass::kTimeOut;
  double start_s = 0.0;
  double end_s = 0.0;
  double score = 0.0;

  Interval interval() const { return {start_s, end_s}; }
};

/// Deterministic proposal order: score descending, then earlier start, then
/// smaller end.
bool proposal_before(const Proposal& a, const Proposal& b);

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-clip features of one video, one row per feature-grid step.
///
/// Columns [0, global_dim) hold scene-context features and columns
/// [global_dim, dims()) hold person-centric (skeleton) features.
struct FeatureSequence {
  std::string video_id;
  FeatureMatrix features;
  std::uint32_t global_dim = 0;
  float feature_fps = 0.0f;
  float duration_s = 0.0f;

  Eigen::Index length() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }

  /// Throws DataError when an invariant does not hold.
  void validate() const;
};

inline double seconds_to_feature_index(double t, double feature_fps) { return t * feature_fps; }
inline double feature_index_to_seconds(double index, double feature_fps) {
  return index / feature_fps;
}

}  // namespace gadet

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
#include "gadet/types.hpp"

#include <cmath>

#include "gadet/errors.hpp"

namespace gadet {

std::string_view to_string(ActivityClass label) {
  switch (label) {
    case ActivityClass::kTimeOut:
      return "time_out";
    case ActivityClass::kStop:
      return "stop";
  }
  return "unknown";
}

std::string_view display_name(ActivityClass label) {
  switch (label) {
    case ActivityClass::kTimeOut:
      return "Time-out";
    case ActivityClass::kStop:
      return "StOP?";
  }
  return "unknown";
}

ActivityClass parse_activity_class(std::string_view text) {
  if (text == "time_out") return ActivityClass::kTimeOut;
  if (text == "stop") return ActivityClass::kStop;
  throw ConfigError("unknown activity label '" + std::string(text) + "'");
}

ActivityClass activity_class_from_index(int index) {
  if (index < 0 || index >= kNumActivityClasses) {
    throw ConfigError("activity class index " + std::to_string(index) + " out of range");
  }
  return static_cast<ActivityClass>(index);
}

bool proposal_before(const Proposal& a, const Proposal& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.start_s != b.start_s) return a.start_s < b.start_s;
  return a.end_s < b.end_s;
}

void FeatureSequence::validate() const {
  if (length() < 1 || dims() < 1) {
    throw DataError("feature sequence '" + video_id + "' is empty");
  }
  if (global_dim > dims()) {
    throw DataError("global feature dimension exceeds total dimension");
  }
  if (!(feature_fps > 0.0f) || !std::isfinite(feature_fps)) {
    throw DataError("feature rate must be positive");
  }
  if (!std::isfinite(duration_s)) throw DataError("duration must be finite");
  // The last clip has to start inside the video.
  const double min_duration = (static_cast<double>(length()) - 1.0) / feature_fps;
  if (static_cast<double>(duration_s) < min_duration - 1e-6) {
    throw DataError("duration " + std::to_string(duration_s) + " s is shorter than the " +
                    std::to_string(length()) + " clips it carries");
  }
  if (!features.allFinite()) {
    throw DataError("feature sequence '" + video_id + "' contains non-finite values");
  }
}

}  // namespace gadet

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

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gadet/types.hpp"

namespace gadet {

/// Temporal IoU. Zero-length or disjoint intervals give 0.
double tiou(Interval a, Interval b);

struct LabeledSegment {
  std::string video_id;
  Segment segment;
};

/// AP of class `label` at tIoU threshold `tau` over all videos.
///
/// Proposals are visited by descending score (ties: earlier start, smaller
/// end, then video id); each one matches the unmatched same-video,
/// same-class ground truth with the highest tIoU >= tau. AP is the area under
/// the precision envelope. Returns NaN when the class has no ground truth.
double average_precision(std::span<const Proposal> proposals, std::span<const LabeledSegment> ground_truth,
                         ActivityClass label, double tau);

/// False-positive rate at the highest score threshold whose recall reaches
/// `recall_target`. Throws MetricError when no label is positive.
double fpr_at_recall(std::span<const double> scores, std::span<const int> labels, double recall_target = 0.95);

struct Clip {
  double start_s = 0.0;
  double end_s = 0.0;
  FeatureMatrix features;  // rows whose grid time falls in [start_s, end_s)
  std::array<int, kNumActivityClasses> label{};  // 1 when >= half the clip lies inside that class
};

/// Consecutive non-overlapping clips of `clip_len_s`; a trailing partial clip
/// is dropped.
std::vector<Clip> clip_split(const FeatureSequence& video, std::span<const Segment> segments,
                             double clip_len_s = 30.0);

}  // namespace gadet

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

#include <string>
#include <vector>

#include "gadet/network.hpp"
#include "gadet/types.hpp"

namespace gadet {

struct DecodeConfig {
  int pre_nms_topk = 2000;
  double score_floor = 0.001;
  double softnms_sigma = 0.5;
  double softnms_prune = 0.001;
  int max_detections_per_video = 200;

  /// Throws ConfigError.
  void validate() const;
};

/// Turns every valid moment and class whose probability reaches
/// `score_floor` into an interval clamped to [0, duration_s], then keeps the
/// `pre_nms_topk` best.
template <typename S>
std::vector<Proposal> decode_proposals(const HeadOutputs<S>& outputs, const std::string& video_id,
                                       double feature_fps, double duration_s, const DecodeConfig& cfg);

/// Gaussian Soft-NMS within each class of one video's proposals. Output is
/// in proposal_before order and capped at max_detections_per_video.
std::vector<Proposal> soft_nms(std::vector<Proposal> proposals, const DecodeConfig& cfg);

}  // namespace gadet

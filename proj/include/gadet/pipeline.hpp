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

// End-to-end inference and evaluation on top of the network, decoder and
// metrics.

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gadet/decode.hpp"
#include "gadet/manifest.hpp"
#include "gadet/metrics.hpp"
#include "gadet/network.hpp"

namespace gadet {

inline const std::vector<double> kDefaultThresholds = {0.1, 0.2, 0.3, 0.4, 0.5};

struct LoadedVideo {
  FeatureSequence sequence;
  std::vector<Segment> segments;
};

/// Reads the feature files of every video in `split`. Throws IoError naming
/// the missing path.
std::vector<LoadedVideo> load_videos(const DatasetManifest& manifest, Split split);

/// Runs `fn(i)` for i in [0, n). With threads <= 1 the calls run in order on
/// the calling thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// forward -> decode -> Soft-NMS for one video.
std::vector<Proposal> detect(const ModelParams<float>& params, const FeatureSequence& seq, const DecodeConfig& cfg);

struct EvalReport {
  std::vector<double> thresholds;
  std::array<std::vector<double>, kNumActivityClasses> ap;  // per class, per threshold; NaN when undefined
  std::array<double, kNumActivityClasses> class_mean{};     // mean over thresholds
  double overall_mean = 0.0;                                // mean of the defined class means
};

EvalReport evaluate_detections(std::span<const Proposal> proposals, std::span<const LabeledSegment> ground_truth,
                               const std::vector<double>& thresholds);

EvalReport evaluate_model(const ModelParams<float>& params, std::span<const LoadedVideo> videos,
                          const DecodeConfig& cfg, const std::vector<double>& thresholds, int threads = 1);

/// Rows (class, tau, AP), then (class, avg, mean) and (all, avg, overall).
std::string eval_report_csv(const EvalReport& report);
/// Fixed-width table with one block per class: thresholds then "Avg.".
/// Undefined values render as "n/a".
std::string format_eval_table(const EvalReport& report);

/// JSON array of {video_id, label, start_s, end_s, score} in descending score.
std::string detections_to_json(std::vector<Proposal> proposals);
std::vector<Proposal> detections_from_json(const std::string& text);

/// Clip score per class: the highest class probability over every pyramid
/// moment whose grid time falls inside the clip.
std::vector<std::array<double, kNumActivityClasses>> score_clips(const ModelParams<float>& params,
                                                                 const FeatureSequence& seq,
                                                                 std::span<const Clip> clips);

}  // namespace gadet

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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gadet/manifest.hpp"
#include "gadet/types.hpp"

namespace gadet {

struct ClassStats {
  double mean_duration_s = 0.0;
  double sd_duration_s = 0.0;
  double expected_count_per_video = 0.0;
};

/// Synthetic surrogate for untrimmed surgery videos in feature space.
///
/// Each channel carries an AR(1) Gaussian background with unit marginal
/// variance. Every planted activity adds its class pattern (one random vector
/// per class, shared by all videos) scaled by `snr`, with linear ramps of
/// width `boundary_blur_s` centred on the annotated boundaries. Planted
/// durations are log-normal with the configured mean and standard deviation.
struct SynthConfig {
  int n_videos = 60;
  double min_video_s = 600.0;
  double max_video_s = 1200.0;
  double feature_fps = 30.0 / 32.0;  // 30 FPS video, one clip every 32 frames
  int dims = 64;
  int global_dim = 48;
  // Time-out and StOP? in class-index order. Counts follow 33 and 22
  // activities over 43 videos; the standard deviations are free knobs.
  std::array<ClassStats, kNumActivityClasses> class_stats{
      ClassStats{89.8, 30.0, 33.0 / 43.0}, ClassStats{62.9, 25.0, 22.0 / 43.0}};
  double snr = 4.0;
  double boundary_blur_s = 4.0;
  double background_ar_coeff = 0.8;
  double global_amplitude = 1.0;  // pattern scale on channels [0, global_dim)
  double local_amplitude = 1.0;   // pattern scale on channels [global_dim, dims)
  /// Applied with make_split when set and n_videos >= 2.
  std::optional<double> train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 0;
  int max_placement_attempts = 200;

  /// Throws ConfigError.
  void validate() const;
};

struct SyntheticVideo {
  FeatureSequence sequence;
  std::vector<Segment> segments;  // sorted by start
};

/// One row per class, `dims` columns; a pure function of `cfg.seed`.
FeatureMatrix class_patterns(const SynthConfig& cfg);

/// Video `index` depends only on (cfg, index). Throws GenerationError when the
/// drawn activities cannot be placed without overlap.
SyntheticVideo generate_video(const SynthConfig& cfg, int index);

/// Writes `video_NNN.tmf` files plus `manifest.json` into `out_dir` and
/// returns the manifest.
DatasetManifest generate_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

/// Video-level split. The train count is round-to-nearest (ties up) of
/// n * train_fraction, clamped so both sides are non-empty.
DatasetManifest make_split(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed);

}  // namespace gadet

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

#include <cstdint>
#include <string>

#include "gadet/decode.hpp"
#include "gadet/network.hpp"

namespace gadet {

/// Wall-clock cost of forward + decode + Soft-NMS on random features.
struct BenchReport {
  Eigen::Index length = 0;
  int repetitions = 0;
  double feature_fps = 0.0;
  double median_s = 0.0;
  double p95_s = 0.0;
  double features_per_s_median = 0.0;
  double features_per_s_p95 = 0.0;
  /// Seconds of video processed per wall-clock second.
  double video_speed_median = 0.0;
  double video_speed_p95 = 0.0;
};

BenchReport bench_throughput(const ModelConfig& cfg, Eigen::Index length, int repetitions,
                             double feature_fps = 30.0 / 32.0, std::uint64_t seed = 0,
                             const DecodeConfig& decode = {});

std::string bench_report_json(const BenchReport& report);

}  // namespace gadet

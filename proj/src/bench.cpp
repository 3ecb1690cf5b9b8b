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
#include "gadet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "gadet/errors.hpp"
#include "gadet/random.hpp"

namespace gadet {
namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

BenchReport bench_throughput(const ModelConfig& cfg, Eigen::Index length, int repetitions, double feature_fps,
                             std::uint64_t seed, const DecodeConfig& decode) {
  if (length < 1 || repetitions < 1) throw ConfigError("bench needs a positive length and repetition count");
  const ModelParams<float> params = init_params<float>(cfg, seed);
  Rng rng(derive_seed(seed, 7));
  Matrix<float> input(length, cfg.input_dim);
  for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = static_cast<float>(rng.normal());
  const double duration = static_cast<double>(length) / feature_fps;

  std::vector<double> times;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto fr = forward(params, input);
    auto proposals = decode_proposals(fr.outputs, "bench", feature_fps, duration, decode);
    proposals = soft_nms(std::move(proposals), decode);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }

  BenchReport report;
  report.length = length;
  report.repetitions = repetitions;
  report.feature_fps = feature_fps;
  report.median_s = quantile(times, 0.5);
  report.p95_s = quantile(times, 0.95);
  report.features_per_s_median = static_cast<double>(length) / report.median_s;
  report.features_per_s_p95 = static_cast<double>(length) / report.p95_s;
  report.video_speed_median = duration / report.median_s;
  report.video_speed_p95 = duration / report.p95_s;
  return report;
}

std::string bench_report_json(const BenchReport& r) {
  nlohmann::json j = {{"T", r.length},
                      {"repetitions", r.repetitions},
                      {"feature_fps", r.feature_fps},
                      {"wall_s", {{"median", r.median_s}, {"p95", r.p95_s}}},
                      {"features_per_s", {{"median", r.features_per_s_median}, {"p95", r.features_per_s_p95}}},
                      {"video_s_per_wall_s", {{"median", r.video_speed_median}, {"p95", r.video_speed_p95}}}};
  return j.dump(2) + "\n";
}

}  // namespace gadet

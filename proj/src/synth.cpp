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
#include "gadet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gadet/errors.hpp"
#include "gadet/feature_file.hpp"
#include "gadet/random.hpp"

namespace gadet {
namespace {

constexpr std::uint64_t kPatternStream = 0xC1A55;
constexpr std::uint64_t kSplitStream = 0x5B117;

// Trapezoid with half-amplitude points at s and e.
double envelope(double t, double s, double e, double blur) {
  if (blur <= 0.0) return (t >= s && t < e) ? 1.0 : 0.0;
  const double rise = std::clamp((t - (s - 0.5 * blur)) / blur, 0.0, 1.0);
  const double fall = std::clamp(((e + 0.5 * blur) - t) / blur, 0.0, 1.0);
  return std::min(rise, fall);
}

bool overlaps(const std::vector<Segment>& placed, double s, double e) {
  return std::any_of(placed.begin(), placed.end(),
                     [&](const Segment& p) { return s < p.end_s && p.start_s < e; });
}

}  // namespace

void SynthConfig::validate() const {
  if (n_videos < 0) throw ConfigError("n_videos must be non-negative");
  if (!(min_video_s > 0.0) || !(min_video_s < max_video_s)) {
    throw ConfigError("video duration range must satisfy 0 < min < max");
  }
  if (!(feature_fps > 0.0)) throw ConfigError("feature_fps must be positive");
  if (dims < 1 || global_dim < 0 || global_dim > dims) {
    throw ConfigError("need dims >= 1 and 0 <= global_dim <= dims");
  }
  for (const auto& cs : class_stats) {
    if (!(cs.mean_duration_s > 0.0) || !(cs.sd_duration_s > 0.0) || cs.expected_count_per_video < 0.0) {
      throw ConfigError("class durations must be positive and counts non-negative");
    }
  }
  if (!(snr >= 0.0)) throw ConfigError("snr must be non-negative");
  if (!(boundary_blur_s >= 0.0)) throw ConfigError("boundary_blur_s must be non-negative");
  if (!(background_ar_coeff >= 0.0 && background_ar_coeff < 1.0)) {
    throw ConfigError("background_ar_coeff must lie in [0, 1)");
  }
  if (train_fraction && !(*train_fraction > 0.0 && *train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (max_placement_attempts < 1) throw ConfigError("max_placement_attempts must be positive");
}

FeatureMatrix class_patterns(const SynthConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, kPatternStream));
  FeatureMatrix patterns(kNumActivityClasses, cfg.dims);
  for (int c = 0; c < kNumActivityClasses; ++c) {
    for (int d = 0; d < cfg.dims; ++d) {
      const double block = d < cfg.global_dim ? cfg.global_amplitude : cfg.local_amplitude;
      patterns(c, d) = static_cast<float>(block * rng.normal());
    }
  }
  return patterns;
}

SyntheticVideo generate_video(const SynthConfig& cfg, int index) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(index)));

  char id[32];
  std::snprintf(id, sizeof(id), "video_%03d", index);

  const float duration = static_cast<float>(rng.uniform(cfg.min_video_s, cfg.max_video_s));
  const auto length = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::floor(static_cast<double>(duration) * cfg.feature_fps)));

  // Durations for every planted activity are drawn before placement so the
  // stream layout does not depend on placement retries.
  std::vector<Segment> wanted;
  for (int c = 0; c < kNumActivityClasses; ++c) {
    const auto& cs = cfg.class_stats[static_cast<std::size_t>(c)];
    const int count = rng.poisson(cs.expected_count_per_video);
    for (int k = 0; k < count; ++k) {
      Segment s;
      s.label = activity_class_from_index(c);
      s.end_s = rng.lognormal_moments(cs.mean_duration_s, cs.sd_duration_s);
      wanted.push_back(s);
    }
  }

  std::vector<Segment> placed;
  for (const Segment& w : wanted) {
    const double len = w.end_s;
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_placement_attempts; ++attempt) {
      const double u = rng.uniform();
      if (len >= duration) continue;
      const double start = u * (static_cast<double>(duration) - len);
      if (overlaps(placed, start, start + len)) continue;
      placed.push_back({w.label, start, start + len});
      ok = true;
      break;
    }
    if (!ok) {
      throw GenerationError(std::string(id) + ": cannot place a " + std::to_string(len) +
                            " s activity without overlap after " +
                            std::to_string(cfg.max_placement_attempts) + " attempts");
    }
  }
  std::sort(placed.begin(), placed.end(),
            [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });

  SyntheticVideo out;
  out.segments = placed;
  FeatureSequence& seq = out.sequence;
  seq.video_id = id;
  seq.global_dim = static_cast<std::uint32_t>(cfg.global_dim);
  seq.feature_fps = static_cast<float>(cfg.feature_fps);
  seq.duration_s = duration;
  seq.features.resize(length, cfg.dims);

  const double phi = cfg.background_ar_coeff;
  const double innovation = std::sqrt(1.0 - phi * phi);
  std::vector<double> state(static_cast<std::size_t>(cfg.dims));
  for (auto& x : state) x = rng.normal();
  for (Eigen::Index t = 0; t < length; ++t) {
    for (int d = 0; d < cfg.dims; ++d) {
      auto& x = state[static_cast<std::size_t>(d)];
      if (t > 0) x = phi * x + innovation * rng.normal();
      seq.features(t, d) = static_cast<float>(x);
    }
  }

  if (cfg.snr > 0.0) {
    const FeatureMatrix patterns = class_patterns(cfg);
    for (const Segment& s : placed) {
      const double lo = s.start_s - 0.5 * cfg.boundary_blur_s;
      const double hi = s.end_s + 0.5 * cfg.boundary_blur_s;
      const auto t0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(lo * cfg.feature_fps)));
      const auto t1 = std::min<Eigen::Index>(length - 1, static_cast<Eigen::Index>(std::ceil(hi * cfg.feature_fps)));
      for (Eigen::Index t = t0; t <= t1; ++t) {
        const double time = feature_index_to_seconds(static_cast<double>(t), cfg.feature_fps);
        const double w = cfg.snr * envelope(time, s.start_s, s.end_s, cfg.boundary_blur_s);
        if (w == 0.0) continue;
        for (int d = 0; d < cfg.dims; ++d) {
          seq.features(t, d) = static_cast<float>(seq.features(t, d) +
                                                  w * patterns(class_index(s.label), d));
        }
      }
    }
  }
  return out;
}

DatasetManifest generate_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (int i = 0; i < cfg.n_videos; ++i) {
    SyntheticVideo video = generate_video(cfg, i);
    const std::string file = video.sequence.video_id + ".tmf";
    write_feature_file(video.sequence, out_dir / file);
    VideoEntry entry;
    entry.id = video.sequence.video_id;
    entry.feature_file = file;
    entry.duration_s = video.sequence.duration_s;
    entry.segments = std::move(video.segments);
    manifest.videos.push_back(std::move(entry));
  }
  if (cfg.train_fraction && cfg.n_videos >= 2) {
    manifest = make_split(manifest, *cfg.train_fraction, cfg.seed);
  }
  manifest.validate();
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

DatasetManifest make_split(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw SplitError("train fraction must lie in (0, 1)");
  }
  const std::size_t n = manifest.videos.size();
  if (n < 2) throw SplitError("need at least two videos to split, have " + std::to_string(n));

  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, kSplitStream));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  DatasetManifest out = manifest;
  for (std::size_t k = 0; k < n; ++k) {
    out.videos[order[k]].split = k < n_train ? Split::kTrain : Split::kTest;
  }
  return out;
}

}  // namespace gadet

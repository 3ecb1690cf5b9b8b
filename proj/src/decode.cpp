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
#include "gadet/decode.hpp"

#include <algorithm>
#include <cmath>

#include "gadet/errors.hpp"
#include "gadet/metrics.hpp"

namespace gadet {

void DecodeConfig::validate() const {
  if (pre_nms_topk < 1 || max_detections_per_video < 1) throw ConfigError("detection limits must be positive");
  if (!(score_floor > 0.0 && score_floor < 1.0)) throw ConfigError("score_floor must lie in (0, 1)");
  if (!(softnms_sigma > 0.0)) throw ConfigError("softnms_sigma must be positive");
  if (!(softnms_prune > 0.0 && softnms_prune < 1.0)) throw ConfigError("softnms_prune must lie in (0, 1)");
}

template <typename S>
std::vector<Proposal> decode_proposals(const HeadOutputs<S>& outputs, const std::string& video_id,
                                       double feature_fps, double duration_s, const DecodeConfig& cfg) {
  std::vector<Proposal> out;
  for (const auto& level : outputs.levels) {
    const double stride = level.stride;
    for (Eigen::Index i = 0; i < level.logits.rows(); ++i) {
      const double grid = static_cast<double>(i) * stride;
      for (Eigen::Index c = 0; c < level.logits.cols(); ++c) {
        const double z = static_cast<double>(level.logits(i, c));
        const double score = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        if (score < cfg.score_floor) continue;
        const double ds = static_cast<double>(level.offsets(i, 0));
        const double de = static_cast<double>(level.offsets(i, 1));
        const double start = std::clamp(feature_index_to_seconds(grid - ds * stride, feature_fps), 0.0, duration_s);
        const double end = std::clamp(feature_index_to_seconds(grid + de * stride, feature_fps), 0.0, duration_s);
        if (!(start < end)) continue;
        out.push_back({video_id, activity_class_from_index(static_cast<int>(c)), start, end, score});
      }
    }
  }
  const auto keep = std::min<std::size_t>(out.size(), static_cast<std::size_t>(cfg.pre_nms_topk));
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), proposal_before);
  out.resize(keep);
  return out;
}

std::vector<Proposal> soft_nms(std::vector<Proposal> proposals, const DecodeConfig& cfg) {
  std::vector<Proposal> kept;
  kept.reserve(proposals.size());
  for (int c = 0; c < kNumActivityClasses; ++c) {
    std::vector<Proposal> pool;
    for (const auto& p : proposals) {
      if (class_index(p.label) == c && p.score >= cfg.softnms_prune) pool.push_back(p);
    }
    while (!pool.empty()) {
      const auto best = std::min_element(pool.begin(), pool.end(), proposal_before);
      const Proposal top = *best;
      pool.erase(best);
      kept.push_back(top);
      for (auto& p : pool) {
        const double overlap = tiou(top.interval(), p.interval());
        p.score *= std::exp(-(overlap * overlap) / cfg.softnms_sigma);
      }
      std::erase_if(pool, [&](const Proposal& p) { return p.score < cfg.softnms_prune; });
    }
  }
  std::sort(kept.begin(), kept.end(), proposal_before);
  if (kept.size() > static_cast<std::size_t>(cfg.max_detections_per_video)) {
    kept.resize(static_cast<std::size_t>(cfg.max_detections_per_video));
  }
  return kept;
}

template std::vector<Proposal> decode_proposals<float>(const HeadOutputs<float>&, const std::string&, double, double,
                                                       const DecodeConfig&);
template std::vector<Proposal> decode_proposals<double>(const HeadOutputs<double>&, const std::string&, double,
                                                        double, const DecodeConfig&);

}  // namespace gadet

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
#include "gadet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gadet/errors.hpp"

namespace gadet {

double tiou(Interval a, Interval b) {
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = std::max(0.0, a.length()) + std::max(0.0, b.length()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double average_precision(std::span<const Proposal> proposals, std::span<const LabeledSegment> ground_truth,
                         ActivityClass label, double tau) {
  std::map<std::string, std::vector<Interval>> gt;
  std::size_t n_gt = 0;
  for (const auto& g : ground_truth) {
    if (g.segment.label != label) continue;
    gt[g.video_id].push_back(g.segment.interval());
    ++n_gt;
  }
  if (n_gt == 0) return std::numeric_limits<double>::quiet_NaN();

  std::vector<const Proposal*> order;
  for (const auto& p : proposals) {
    if (p.label == label) order.push_back(&p);
  }
  std::sort(order.begin(), order.end(), [](const Proposal* a, const Proposal* b) {
    if (proposal_before(*a, *b)) return true;
    if (proposal_before(*b, *a)) return false;
    return a->video_id < b->video_id;
  });

  std::map<std::string, std::vector<bool>> used;
  for (const auto& [vid, segs] : gt) used[vid].assign(segs.size(), false);

  std::vector<double> precision;
  std::vector<bool> hit;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Proposal& p = *order[k];
    bool matched = false;
    const auto it = gt.find(p.video_id);
    if (it != gt.end()) {
      auto& flags = used[p.video_id];
      int best = -1;
      double best_iou = -1.0;
      for (std::size_t j = 0; j < it->second.size(); ++j) {
        if (flags[j]) continue;
        const double v = tiou(p.interval(), it->second[j]);
        if (v >= tau && v > best_iou) {
          best_iou = v;
          best = static_cast<int>(j);
        }
      }
      if (best >= 0) {
        flags[static_cast<std::size_t>(best)] = true;
        ++tp;
        matched = true;
      }
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    hit.push_back(matched);
  }

  // All-point interpolation: every true positive adds 1/n_gt recall at the
  // best precision reachable from its rank onwards.
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    if (hit[k]) ap += precision[k];
  }
  ap /= static_cast<double>(n_gt);
  return ap;
}

double fpr_at_recall(std::span<const double> scores, std::span<const int> labels, double recall_target) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
  if (positives == 0) throw MetricError("FPR at recall needs at least one positive label");
  const auto negatives = static_cast<std::ptrdiff_t>(labels.size()) - positives;

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::ptrdiff_t tp = 0;
  std::ptrdiff_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    // admit every sample tied at this threshold
    while (k < order.size() && scores[order[k]] == threshold) {
      if (labels[order[k]] != 0) {
        ++tp;
      } else {
        ++fp;
      }
      ++k;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    if (recall >= recall_target - 1e-12) {
      return negatives > 0 ? static_cast<double>(fp) / static_cast<double>(negatives) : 0.0;
    }
  }
  return negatives > 0 ? static_cast<double>(fp) / static_cast<double>(negatives) : 0.0;
}

std::vector<Clip> clip_split(const FeatureSequence& video, std::span<const Segment> segments, double clip_len_s) {
  if (!(clip_len_s > 0.0)) throw MetricError("clip length must be positive");
  const auto n_clips = static_cast<std::size_t>(std::floor(static_cast<double>(video.duration_s) / clip_len_s + 1e-9));
  std::vector<Clip> clips;
  clips.reserve(n_clips);
  for (std::size_t k = 0; k < n_clips; ++k) {
    Clip clip;
    clip.start_s = static_cast<double>(k) * clip_len_s;
    clip.end_s = clip.start_s + clip_len_s;

    const auto first = static_cast<Eigen::Index>(std::ceil(clip.start_s * video.feature_fps - 1e-9));
    const auto last = static_cast<Eigen::Index>(std::ceil(clip.end_s * video.feature_fps - 1e-9));
    const Eigen::Index lo = std::clamp<Eigen::Index>(first, 0, video.length());
    const Eigen::Index hi = std::clamp<Eigen::Index>(last, lo, video.length());
    clip.features = video.features.middleRows(lo, hi - lo);

    for (int c = 0; c < kNumActivityClasses; ++c) {
      double covered = 0.0;
      for (const auto& s : segments) {
        if (class_index(s.label) != c) continue;
        covered += std::max(0.0, std::min(clip.end_s, s.end_s) - std::max(clip.start_s, s.start_s));
      }
      clip.label[static_cast<std::size_t>(c)] = covered >= 0.5 * clip_len_s ? 1 : 0;
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

}  // namespace gadet

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
#include "gadet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gadet/errors.hpp"
#include "gadet/feature_file.hpp"

namespace gadet {
namespace {

double mean_defined(std::span<const double> values) {
  double sum = 0.0;
  int n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

std::string cell(double v, int precision) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

}  // namespace

std::vector<LoadedVideo> load_videos(const DatasetManifest& manifest, Split split) {
  std::vector<LoadedVideo> out;
  for (const VideoEntry* v : manifest.videos_in(split)) {
    const auto path = manifest.feature_path(*v);
    if (!std::filesystem::exists(path)) throw IoError("missing feature file " + path.string());
    out.push_back({read_feature_file(path, v->id), v->segments});
  }
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<Proposal> detect(const ModelParams<float>& params, const FeatureSequence& seq, const DecodeConfig& cfg) {
  const auto fr = forward(params, seq);
  auto proposals = decode_proposals(fr.outputs, seq.video_id, seq.feature_fps, seq.duration_s, cfg);
  return soft_nms(std::move(proposals), cfg);
}

EvalReport evaluate_detections(std::span<const Proposal> proposals, std::span<const LabeledSegment> ground_truth,
                               const std::vector<double>& thresholds) {
  EvalReport report;
  report.thresholds = thresholds;
  for (int c = 0; c < kNumActivityClasses; ++c) {
    auto& row = report.ap[static_cast<std::size_t>(c)];
    for (double tau : thresholds) {
      row.push_back(average_precision(proposals, ground_truth, activity_class_from_index(c), tau));
    }
    report.class_mean[static_cast<std::size_t>(c)] = mean_defined(row);
  }
  report.overall_mean = mean_defined(report.class_mean);
  return report;
}

EvalReport evaluate_model(const ModelParams<float>& params, std::span<const LoadedVideo> videos,
                          const DecodeConfig& cfg, const std::vector<double>& thresholds, int threads) {
  std::vector<std::vector<Proposal>> per_video(videos.size());
  parallel_for(videos.size(), threads, [&](std::size_t i) { per_video[i] = detect(params, videos[i].sequence, cfg); });
  std::vector<Proposal> all;
  std::vector<LabeledSegment> gt;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    all.insert(all.end(), per_video[i].begin(), per_video[i].end());
    for (const auto& s : videos[i].segments) gt.push_back({videos[i].sequence.video_id, s});
  }
  return evaluate_detections(all, gt, thresholds);
}

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class,tau,ap\n";
  const auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
  };
  for (int c = 0; c < kNumActivityClasses; ++c) {
    const auto name = to_string(activity_class_from_index(c));
    for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
      out << name << "," << report.thresholds[k] << "," << num(report.ap[static_cast<std::size_t>(c)][k]) << "\n";
    }
    out << name << ",avg," << num(report.class_mean[static_cast<std::size_t>(c)]) << "\n";
  }
  out << "all,avg," << num(report.overall_mean) << "\n";
  return out.str();
}

std::string format_eval_table(const EvalReport& report) {
  std::ostringstream out;
  for (int c = 0; c < kNumActivityClasses; ++c) {
    out << display_name(activity_class_from_index(c)) << "\n";
    for (double tau : report.thresholds) out << std::setw(8) << tau;
    out << std::setw(8) << "Avg." << "\n";
    for (double v : report.ap[static_cast<std::size_t>(c)]) out << std::setw(8) << cell(100.0 * v, 2);
    out << std::setw(8) << cell(100.0 * report.class_mean[static_cast<std::size_t>(c)], 2) << "\n";
  }
  out << "mean AP: " << cell(100.0 * report.overall_mean, 2) << "\n";
  return out.str();
}

std::string detections_to_json(std::vector<Proposal> proposals) {
  std::stable_sort(proposals.begin(), proposals.end(), proposal_before);
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : proposals) {
    doc.push_back({{"video_id", p.video_id},
                   {"label", to_string(p.label)},
                   {"start_s", p.start_s},
                   {"end_s", p.end_s},
                   {"score", p.score}});
  }
  return doc.dump(2) + "\n";
}

std::vector<Proposal> detections_from_json(const std::string& text) {
  std::vector<Proposal> out;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      out.push_back({j.at("video_id").get<std::string>(), parse_activity_class(j.at("label").get<std::string>()),
                     j.at("start_s").get<double>(), j.at("end_s").get<double>(), j.at("score").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed detection JSON: ") + e.what());
  }
  return out;
}

std::vector<std::array<double, kNumActivityClasses>> score_clips(const ModelParams<float>& params,
                                                                 const FeatureSequence& seq,
                                                                 std::span<const Clip> clips) {
  std::vector<std::array<double, kNumActivityClasses>> scores(clips.size());
  for (auto& s : scores) s.fill(0.0);
  if (clips.empty()) return scores;
  const auto fr = forward(params, seq);
  const double clip_len = clips.front().end_s - clips.front().start_s;
  const int classes = std::min(params.config.num_classes, kNumActivityClasses);
  for (const auto& level : fr.outputs.levels) {
    for (Eigen::Index i = 0; i < level.logits.rows(); ++i) {
      const double t = feature_index_to_seconds(static_cast<double>(i) * level.stride, seq.feature_fps);
      const auto k = static_cast<std::size_t>(std::floor(t / clip_len));
      if (k >= clips.size() || t < clips[k].start_s || t >= clips[k].end_s) continue;
      for (int c = 0; c < classes; ++c) {
        const double z = static_cast<double>(level.logits(i, c));
        const double p = 1.0 / (1.0 + std::exp(-z));
        auto& slot = scores[k][static_cast<std::size_t>(c)];
        slot = std::max(slot, p);
      }
    }
  }
  return scores;
}

}  // namespace gadet

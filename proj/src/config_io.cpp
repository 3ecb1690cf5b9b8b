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
#include "gadet/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gadet/errors.hpp"

namespace gadet {

using nlohmann::json;

namespace {

// Reads optional keys from one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + " must be a JSON object");
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.contains(key)) throw ConfigError("unknown key '" + key + "' in " + context_);
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    known_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> known_;
};

json to_json(const AssignmentConfig& c) {
  return {{"range_bounds", c.range_bounds}, {"center_radius", c.center_radius}};
}

json to_json(const DecodeConfig& c) {
  return {{"pre_nms_topk", c.pre_nms_topk},
          {"score_floor", c.score_floor},
          {"softnms_sigma", c.softnms_sigma},
          {"softnms_prune", c.softnms_prune},
          {"max_detections_per_video", c.max_detections_per_video}};
}

AssignmentConfig assignment_from_json(const json& j) {
  AssignmentConfig c;
  Fields f(j, "assignment");
  f.get("range_bounds", c.range_bounds);
  f.get("center_radius", c.center_radius);
  f.finish();
  return c;
}

DecodeConfig decode_from_json(const json& j) {
  DecodeConfig c;
  Fields f(j, "decode");
  f.get("pre_nms_topk", c.pre_nms_topk);
  f.get("score_floor", c.score_floor);
  f.get("softnms_sigma", c.softnms_sigma);
  f.get("softnms_prune", c.softnms_prune);
  f.get("max_detections_per_video", c.max_detections_per_video);
  f.finish();
  return c;
}

template <typename Parse>
auto parse_enum(Fields& f, const char* key, Parse parse, decltype(parse(std::string_view{})) fallback) {
  std::string text;
  f.get(key, text);
  return text.empty() ? fallback : parse(text);
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"input_dim", c.input_dim},
          {"backbone_width", c.backbone_width},
          {"kernel_size", c.kernel_size},
          {"pyramid_levels", c.pyramid_levels},
          {"head_width", c.head_width},
          {"head_convs", c.head_convs},
          {"num_classes", c.num_classes},
          {"pyramid_mode", to_string(c.pyramid_mode)},
          {"feature_mode", to_string(c.feature_mode)},
          {"prior_prob", c.prior_prob}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  Fields f(j, "model config");
  f.get("input_dim", c.input_dim);
  f.get("backbone_width", c.backbone_width);
  f.get("kernel_size", c.kernel_size);
  f.get("pyramid_levels", c.pyramid_levels);
  f.get("head_width", c.head_width);
  f.get("head_convs", c.head_convs);
  f.get("num_classes", c.num_classes);
  f.get("prior_prob", c.prior_prob);
  c.pyramid_mode = parse_enum(f, "pyramid_mode", parse_pyramid_mode, c.pyramid_mode);
  c.feature_mode = parse_enum(f, "feature_mode", parse_feature_mode, c.feature_mode);
  int backbone_convs = kBackboneConvs;
  f.get("backbone_convs", backbone_convs);
  if (backbone_convs != kBackboneConvs) throw ConfigError("the backbone always has two convolutions");
  f.finish();
  c.validate();
  return c;
}

json to_json(const SynthConfig& c) {
  json stats = json::object();
  for (int k = 0; k < kNumActivityClasses; ++k) {
    const auto& s = c.class_stats[static_cast<std::size_t>(k)];
    stats[std::string(to_string(activity_class_from_index(k)))] = {
        {"mean_duration_s", s.mean_duration_s},
        {"sd_duration_s", s.sd_duration_s},
        {"expected_count_per_video", s.expected_count_per_video}};
  }
  json j = {{"n_videos", c.n_videos},
            {"video_duration_range_s", {c.min_video_s, c.max_video_s}},
            {"feature_fps", c.feature_fps},
            {"D", c.dims},
            {"d_g", c.global_dim},
            {"class_stats", stats},
            {"snr", c.snr},
            {"boundary_blur_s", c.boundary_blur_s},
            {"background_ar_coeff", c.background_ar_coeff},
            {"global_amplitude", c.global_amplitude},
            {"local_amplitude", c.local_amplitude},
            {"seed", c.seed},
            {"max_placement_attempts", c.max_placement_attempts}};
  j["train_fraction"] = c.train_fraction ? json(*c.train_fraction) : json(nullptr);
  return j;
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  Fields f(j, "synth config");
  f.get("n_videos", c.n_videos);
  if (const json* range = f.sub("video_duration_range_s")) {
    if (!range->is_array() || range->size() != 2) throw ConfigError("video_duration_range_s must be [min, max]");
    c.min_video_s = (*range)[0].get<double>();
    c.max_video_s = (*range)[1].get<double>();
  }
  f.get("feature_fps", c.feature_fps);
  f.get("D", c.dims);
  f.get("d_g", c.global_dim);
  if (const json* stats = f.sub("class_stats")) {
    Fields sf(*stats, "class_stats");
    for (int k = 0; k < kNumActivityClasses; ++k) {
      const std::string name(to_string(activity_class_from_index(k)));
      if (const json* s = sf.sub(name.c_str())) {
        auto& cs = c.class_stats[static_cast<std::size_t>(k)];
        Fields cf(*s, "class_stats." + name);
        cf.get("mean_duration_s", cs.mean_duration_s);
        cf.get("sd_duration_s", cs.sd_duration_s);
        cf.get("expected_count_per_video", cs.expected_count_per_video);
        cf.finish();
      }
    }
    sf.finish();
  }
  f.get("snr", c.snr);
  f.get("boundary_blur_s", c.boundary_blur_s);
  f.get("background_ar_coeff", c.background_ar_coeff);
  f.get("global_amplitude", c.global_amplitude);
  f.get("local_amplitude", c.local_amplitude);
  f.get("seed", c.seed);
  f.get("max_placement_attempts", c.max_placement_attempts);
  if (const json* tf = f.sub("train_fraction")) {
    c.train_fraction = tf->is_null() ? std::nullopt : std::optional<double>(tf->get<double>());
  }
  f.finish();
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"warmup_epochs", c.warmup_epochs},
          {"grad_clip_norm", c.grad_clip_norm},
          {"seed", c.seed},
          {"feature_mode", to_string(c.feature_mode)},
          {"pyramid_mode", to_string(c.pyramid_mode)},
          {"focal_gamma", c.loss.focal_gamma},
          {"assignment", to_json(c.assignment)},
          {"decode", to_json(c.decode)},
          {"eval_thresholds", c.eval_thresholds},
          {"eval_every", c.eval_every},
          {"threads", c.threads}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  Fields f(j, "train config");
  f.get("epochs", c.epochs);
  f.get("batch_size", c.batch_size);
  f.get("learning_rate", c.learning_rate);
  f.get("weight_decay", c.weight_decay);
  f.get("warmup_epochs", c.warmup_epochs);
  f.get("grad_clip_norm", c.grad_clip_norm);
  f.get("seed", c.seed);
  c.feature_mode = parse_enum(f, "feature_mode", parse_feature_mode, c.feature_mode);
  c.pyramid_mode = parse_enum(f, "pyramid_mode", parse_pyramid_mode, c.pyramid_mode);
  f.get("focal_gamma", c.loss.focal_gamma);
  if (const json* a = f.sub("assignment")) c.assignment = assignment_from_json(*a);
  if (const json* d = f.sub("decode")) c.decode = decode_from_json(*d);
  f.get("eval_thresholds", c.eval_thresholds);
  f.get("eval_every", c.eval_every);
  f.get("threads", c.threads);
  f.finish();
  c.validate();
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into line/column
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": invalid JSON: " + e.what());
  }
}

}  // namespace gadet

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
#include "gadet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "gadet/checkpoint.hpp"
#include "gadet/config_io.hpp"
#include "gadet/errors.hpp"
#include "gadet/optimizer.hpp"
#include "gadet/random.hpp"

namespace gadet {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

int input_width(const FeatureSequence& seq, FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kFull:
      return static_cast<int>(seq.dims());
    case FeatureMode::kGlobalOnly:
      return static_cast<int>(seq.global_dim);
    case FeatureMode::kLocalOnly:
      return static_cast<int>(seq.dims() - seq.global_dim);
  }
  return 0;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

struct VideoStep {
  ModelParams<float> grads;
  LossBreakdown loss;
};

VideoStep video_step(const ModelParams<float>& params, const LoadedVideo& video, const TrainConfig& cfg,
                     double grad_scale) {
  VideoStep out;
  const auto fr = forward(params, video.sequence);
  std::vector<LevelGeometry> geometry;
  for (const auto& level : fr.pyramid.levels) geometry.push_back(level.geometry);
  MomentTargets targets = assign_targets(video.segments, geometry, video.sequence.feature_fps, cfg.assignment);
  HeadOutputs<float> upstream;
  out.loss = total_loss(fr.outputs, targets, cfg.loss, &upstream, grad_scale);
  out.grads = params.zeros_like();
  backward(params, fr, upstream, out.grads);
  return out;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (warmup_epochs < 0) throw ConfigError("warmup_epochs must be non-negative");
  if (!(grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be positive");
  if (!(loss.focal_gamma >= 0.0)) throw ConfigError("focal_gamma must be non-negative");
  if (eval_every < 0) throw ConfigError("eval_every must be non-negative");
  if (eval_thresholds.empty()) throw ConfigError("eval_thresholds must not be empty");
  decode.validate();
}

TrainResult train(std::span<const LoadedVideo> train_videos, std::span<const LoadedVideo> val_videos,
                  ModelConfig model_cfg, const TrainConfig& cfg, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_videos.empty()) throw ManifestError("training split is empty");
  model_cfg.feature_mode = cfg.feature_mode;
  model_cfg.pyramid_mode = cfg.pyramid_mode;
  model_cfg.input_dim = input_width(train_videos.front().sequence, cfg.feature_mode);
  model_cfg.validate();
  cfg.assignment.validate(model_cfg.pyramid_levels);
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  }

  TrainResult result;
  ModelParams<float> params = init_params<float>(model_cfg, derive_seed(cfg.seed, kInitStream));
  AdamW optimizer(params, {0.9, 0.999, 1e-8, cfg.weight_decay});
  result.best_params = params;

  const auto n = train_videos.size();
  const auto batches_per_epoch = static_cast<long>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                                   static_cast<std::size_t>(cfg.batch_size));
  const long total_steps = batches_per_epoch * cfg.epochs;
  const long warmup_steps = batches_per_epoch * cfg.warmup_epochs;
  Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));
  std::vector<std::size_t> order(n);

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.below(i + 1)]);

    double epoch_loss = 0.0;
    for (std::size_t first = 0; first < n; first += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t count = std::min(n - first, static_cast<std::size_t>(cfg.batch_size));
      const double scale = 1.0 / static_cast<double>(count);
      std::vector<VideoStep> parts(count);
      parallel_for(count, cfg.threads, [&](std::size_t k) {
        parts[k] = video_step(params, train_videos[order[first + k]], cfg, scale);
      });

      ModelParams<float> grads = std::move(parts[0].grads);
      StepLog log;
      log.step = step;
      log.epoch = epoch;
      for (std::size_t k = 0; k < count; ++k) {
        if (k > 0) {
          auto dst = grads.tensors();
          const auto src = parts[k].grads.tensors();
          for (std::size_t t = 0; t < dst.size(); ++t) *dst[t].value += *src[t].value;
        }
        log.total_loss += scale * parts[k].loss.total;
        log.cls_pos += scale * parts[k].loss.cls_pos;
        log.cls_neg += scale * parts[k].loss.cls_neg;
        log.reg += scale * parts[k].loss.reg;
      }
      if (!std::isfinite(log.total_loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step << " (epoch " << epoch << "): total=" << log.total_loss
            << " cls_pos=" << log.cls_pos << " cls_neg=" << log.cls_neg << " reg=" << log.reg;
        throw DivergenceError(msg.str());
      }
      log.grad_norm = clip_grad_norm(grads, cfg.grad_clip_norm);
      if (!std::isfinite(log.grad_norm)) {
        throw DivergenceError("non-finite gradient norm at step " + std::to_string(step));
      }
      log.lr = learning_rate_at(step, total_steps, warmup_steps, cfg.learning_rate);
      optimizer.step(params, grads, log.lr);
      epoch_loss += log.total_loss;
      result.steps.push_back(log);
      ++step;
    }

    EpochLog elog;
    elog.epoch = epoch;
    elog.mean_loss = epoch_loss / static_cast<double>(batches_per_epoch);
    const bool last = epoch + 1 == cfg.epochs;
    if (cfg.eval_every > 0 && !val_videos.empty() && ((epoch + 1) % cfg.eval_every == 0 || last)) {
      const EvalReport report = evaluate_model(params, val_videos, cfg.decode, cfg.eval_thresholds, cfg.threads);
      elog.val_map = report.overall_mean;
      if (!std::isnan(elog.val_map) && (std::isnan(result.best_val_map) || elog.val_map > result.best_val_map)) {
        result.best_val_map = elog.val_map;
        result.best_epoch = epoch;
        result.best_params = params;
      }
    }
    result.epochs.push_back(elog);
    if (on_epoch) on_epoch(elog);
  }

  result.final_params = params;
  if (result.best_epoch < 0) result.best_params = params;

  if (!out_dir.empty()) {
    save_checkpoint(result.final_params, out_dir / "final.ckpt");
    save_checkpoint(result.best_params, out_dir / "best.ckpt");
    write_text(out_dir / "metrics.csv", metrics_csv(result.steps));
    std::ostringstream epochs;
    epochs << "epoch,mean_loss,val_map\n";
    for (const auto& e : result.epochs) {
      epochs << e.epoch << "," << format_double(e.mean_loss) << ","
             << (std::isnan(e.val_map) ? std::string("nan") : format_double(e.val_map)) << "\n";
    }
    write_text(out_dir / "epochs.csv", epochs.str());
    write_text(out_dir / "model_config.json", to_json(model_cfg).dump(2) + "\n");
    write_text(out_dir / "train_config.json", to_json(cfg).dump(2) + "\n");
  }
  return result;
}

TrainResult train(const DatasetManifest& manifest, ModelConfig model_cfg, const TrainConfig& cfg,
                  const std::filesystem::path& out_dir, const EpochCallback& on_epoch) {
  const auto train_videos = load_videos(manifest, Split::kTrain);
  const auto val_videos = load_videos(manifest, Split::kTest);
  return train(train_videos, val_videos, model_cfg, cfg, out_dir, on_epoch);
}

std::string metrics_csv(std::span<const StepLog> steps) {
  std::ostringstream out;
  out << "step,epoch,total_loss,cls_pos,cls_neg,reg,lr,grad_norm\n";
  for (const auto& s : steps) {
    out << s.step << "," << s.epoch << "," << format_double(s.total_loss) << "," << format_double(s.cls_pos) << ","
        << format_double(s.cls_neg) << "," << format_double(s.reg) << "," << format_double(s.lr) << ","
        << format_double(s.grad_norm) << "\n";
  }
  return out.str();
}

}  // namespace gadet

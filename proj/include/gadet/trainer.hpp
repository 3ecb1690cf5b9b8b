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
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gadet/assign.hpp"
#include "gadet/decode.hpp"
#include "gadet/loss.hpp"
#include "gadet/manifest.hpp"
#include "gadet/network.hpp"
#include "gadet/pipeline.hpp"

namespace gadet {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 2;  // videos per step
  double learning_rate = 1e-4;
  double weight_decay = 0.05;
  int warmup_epochs = 5;
  double grad_clip_norm = 1.0;
  std::uint64_t seed = 0;
  FeatureMode feature_mode = FeatureMode::kFull;
  PyramidMode pyramid_mode = PyramidMode::kMaxPlusAvg;
  LossConfig loss;
  AssignmentConfig assignment;
  DecodeConfig decode;
  std::vector<double> eval_thresholds = kDefaultThresholds;
  /// Validate every this many epochs (and after the last); 0 disables
  /// validation, in which case the best checkpoint is the final one.
  int eval_every = 1;
  /// Worker threads for per-video work inside a batch and for validation.
  /// Results do not depend on this value.
  int threads = 1;

  /// Throws ConfigError.
  void validate() const;
};

struct StepLog {
  long step = 0;
  int epoch = 0;
  double total_loss = 0.0;
  double cls_pos = 0.0;
  double cls_neg = 0.0;
  double reg = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;  // before clipping
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_map = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  ModelParams<float> final_params;
  ModelParams<float> best_params;
  double best_val_map = std::numeric_limits<double>::quiet_NaN();
  int best_epoch = -1;  // -1: initialization / no validation
  std::vector<StepLog> steps;
  std::vector<EpochLog> epochs;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains on in-memory videos. The model's feature and pyramid modes are
/// taken from `train_cfg`, and its input width from the data. When `out_dir`
/// is non-empty, writes final.ckpt, best.ckpt, metrics.csv and epochs.csv
/// there. Throws DivergenceError on a non-finite loss.
TrainResult train(std::span<const LoadedVideo> train_videos, std::span<const LoadedVideo> val_videos,
                  ModelConfig model_cfg, const TrainConfig& train_cfg, const std::filesystem::path& out_dir = {},
                  const EpochCallback& on_epoch = {});

/// Loads the manifest's train split (and test split for validation) and
/// trains.
TrainResult train(const DatasetManifest& manifest, ModelConfig model_cfg, const TrainConfig& train_cfg,
                  const std::filesystem::path& out_dir = {}, const EpochCallback& on_epoch = {});

std::string metrics_csv(std::span<const StepLog> steps);

}  // namespace gadet

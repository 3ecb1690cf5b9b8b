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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gadet/trainer.hpp"

namespace gadet {

struct AblationCell {
  PyramidMode pyramid_mode = PyramidMode::kMaxPlusAvg;
  FeatureMode feature_mode = FeatureMode::kFull;
};

struct AblationRow {
  AblationCell cell;
  EvalReport report;
};

/// Cartesian product in row order: pyramid modes outer, feature modes inner.
std::vector<AblationCell> ablation_grid(std::span<const PyramidMode> pyramid_modes,
                                        std::span<const FeatureMode> feature_modes);

/// Trains one model per cell with the same seed and evaluates its final
/// parameters on the test split. Per-cell checkpoints go to
/// `out_dir/<pyramid>_<feature>/` when `out_dir` is non-empty.
std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, std::span<const AblationCell> grid,
                                      const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                                      const std::filesystem::path& out_dir = {});

/// One row per configuration; columns are AP at each threshold and the
/// average, per class, then the overall mean.
std::string ablation_csv(std::span<const AblationRow> rows);

}  // namespace gadet

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
#include "gadet/ablation.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "gadet/errors.hpp"

namespace gadet {

std::vector<AblationCell> ablation_grid(std::span<const PyramidMode> pyramid_modes,
                                        std::span<const FeatureMode> feature_modes) {
  std::vector<AblationCell> grid;
  for (PyramidMode p : pyramid_modes) {
    for (FeatureMode f : feature_modes) grid.push_back({p, f});
  }
  return grid;
}

std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, std::span<const AblationCell> grid,
                                      const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                                      const std::filesystem::path& out_dir) {
  if (grid.empty()) throw ConfigError("ablation grid is empty");
  const auto train_videos = load_videos(manifest, Split::kTrain);
  const auto test_videos = load_videos(manifest, Split::kTest);
  if (test_videos.empty()) throw ManifestError("ablation needs a non-empty test split");

  std::vector<AblationRow> rows;
  for (const AblationCell& cell : grid) {
    TrainConfig cfg = train_cfg;
    cfg.pyramid_mode = cell.pyramid_mode;
    cfg.feature_mode = cell.feature_mode;
    cfg.eval_every = 0;
    std::filesystem::path cell_dir;
    if (!out_dir.empty()) {
      cell_dir = out_dir / (std::string(to_string(cell.pyramid_mode)) + "_" + std::string(to_string(cell.feature_mode)));
    }
    const TrainResult result = train(train_videos, {}, model_cfg, cfg, cell_dir);
    rows.push_back({cell, evaluate_model(result.final_params, test_videos, cfg.decode, cfg.eval_thresholds,
                                         cfg.threads)});
  }
  return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "row,pyramid_mode,feature_mode";
  if (!rows.empty()) {
    for (int c = 0; c < kNumActivityClasses; ++c) {
      const auto name = to_string(activity_class_from_index(c));
      for (double tau : rows.front().report.thresholds) out << "," << name << "@" << tau;
      out << "," << name << "@avg";
    }
  }
  out << ",mean\n";
  const auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
  };
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    out << r << "," << to_string(row.cell.pyramid_mode) << "," << to_string(row.cell.feature_mode);
    for (int c = 0; c < kNumActivityClasses; ++c) {
      for (double ap : row.report.ap[static_cast<std::size_t>(c)]) out << "," << num(ap);
      out << "," << num(row.report.class_mean[static_cast<std::size_t>(c)]);
    }
    out << "," << num(row.report.overall_mean) << "\n";
  }
  return out.str();
}

}  // namespace gadet

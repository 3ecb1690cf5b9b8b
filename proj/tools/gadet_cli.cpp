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

// Command-line front end: synth, train, eval, detect, clip-eval, bench, ablate.
//
// Exit codes: 0 success, 2 input error, 3 generation error, 4 training
// divergence, 1 anything else.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gadet/ablation.hpp"
#include "gadet/bench.hpp"
#include "gadet/checkpoint.hpp"
#include "gadet/config_io.hpp"
#include "gadet/errors.hpp"
#include "gadet/feature_file.hpp"
#include "gadet/manifest.hpp"
#include "gadet/metrics.hpp"
#include "gadet/pipeline.hpp"
#include "gadet/synth.hpp"
#include "gadet/trainer.hpp"

namespace fs = std::filesystem;
using namespace gadet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitInput = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitDivergence = 4;

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

ModelConfig load_model_config(const std::string& path) {
  return path.empty() ? ModelConfig{} : model_config_from_json(read_json_file(path));
}

TrainConfig load_train_config(const std::string& path) {
  return path.empty() ? TrainConfig{} : train_config_from_json(read_json_file(path));
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad threshold '" + item + "'");
    }
    if (!(out.back() > 0.0 && out.back() <= 1.0)) throw ConfigError("thresholds must lie in (0, 1]");
  }
  if (out.empty()) throw ConfigError("no thresholds given");
  return out;
}

struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  SynthConfig cfg = a.config.empty() ? SynthConfig{} : synth_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const DatasetManifest manifest = generate_dataset(cfg, a.out);
  std::cout << "wrote " << manifest.videos.size() << " videos to " << a.out << "\n"
            << format_counts(manifest.counts());
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string model_config;
  std::string train_config;
  std::string out;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  const DatasetManifest manifest = load_manifest(a.data);
  ModelConfig model = load_model_config(a.model_config);
  TrainConfig cfg = load_train_config(a.train_config);
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  const auto on_epoch = [&](const EpochLog& e) {
    if (a.quiet) return;
    std::cout << "epoch " << std::setw(3) << e.epoch + 1 << "/" << cfg.epochs << "  loss " << std::fixed
              << std::setprecision(4) << e.mean_loss;
    if (!std::isnan(e.val_map)) std::cout << "  val mAP " << std::setprecision(4) << e.val_map;
    std::cout << std::defaultfloat << std::endl;
  };
  const TrainResult result = train(manifest, model, cfg, a.out, on_epoch);
  std::cout << "checkpoints written to " << a.out << " (best epoch "
            << (result.best_epoch >= 0 ? std::to_string(result.best_epoch + 1) : std::string("final")) << ")\n";
  return kExitOk;
}

struct EvalArgs {
  std::string data;
  std::string ckpt;
  std::string thresholds = "0.1,0.2,0.3,0.4,0.5";
  std::string out;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  const DatasetManifest manifest = load_manifest(a.data);
  const ModelParams<float> params = load_checkpoint(a.ckpt);
  const auto videos = load_videos(manifest, Split::kTest);
  if (videos.empty()) throw ManifestError("test split is empty");
  const EvalReport report = evaluate_model(params, videos, DecodeConfig{}, parse_thresholds(a.thresholds), a.threads);
  std::cout << format_eval_table(report);
  if (!a.out.empty()) {
    write_file(a.out, eval_report_csv(report));
  } else {
    std::cout << "\n" << eval_report_csv(report);
  }
  return kExitOk;
}

struct DetectArgs {
  std::string features;
  std::string ckpt;
  std::string out;
};

int run_detect(const DetectArgs& a) {
  const ModelParams<float> params = load_checkpoint(a.ckpt);
  const FeatureSequence seq = read_feature_file(a.features);
  const auto detections = detect(params, seq, DecodeConfig{});
  write_file(a.out, detections_to_json(detections));
  std::cout << "wrote " << detections.size() << " detections to " << a.out << "\n";
  return kExitOk;
}

struct ClipEvalArgs {
  std::string data;
  std::string ckpt;
  double clip_len = 30.0;
  std::string split = "test";
};

int run_clip_eval(const ClipEvalArgs& a) {
  const DatasetManifest manifest = load_manifest(a.data);
  const ModelParams<float> params = load_checkpoint(a.ckpt);
  const auto videos = load_videos(manifest, parse_split(a.split));
  std::array<std::vector<double>, kNumActivityClasses> scores;
  std::array<std::vector<int>, kNumActivityClasses> labels;
  for (const auto& v : videos) {
    const auto clips = clip_split(v.sequence, v.segments, a.clip_len);
    const auto clip_scores = score_clips(params, v.sequence, clips);
    for (std::size_t k = 0; k < clips.size(); ++k) {
      for (std::size_t c = 0; c < kNumActivityClasses; ++c) {
        scores[c].push_back(clip_scores[k][c]);
        labels[c].push_back(clips[k].label[c]);
      }
    }
  }
  int reported = 0;
  std::cout << "FPR at 95% recall (" << a.clip_len << " s clips)\n";
  for (int c = 0; c < kNumActivityClasses; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    const auto positives = std::count(labels[idx].begin(), labels[idx].end(), 1);
    std::cout << std::setw(10) << display_name(activity_class_from_index(c)) << "  ";
    if (positives == 0) {
      std::cout << "n/a (no positive clips)\n";
      continue;
    }
    std::cout << std::fixed << std::setprecision(4) << fpr_at_recall(scores[idx], labels[idx], 0.95)
              << std::defaultfloat << "  (" << positives << " positive / " << labels[idx].size() << " clips)\n";
    ++reported;
  }
  if (reported == 0) throw MetricError("no positive clips in the evaluated split");
  return kExitOk;
}

struct BenchArgs {
  std::string model_config;
  long length = 4096;
  int reps = 10;
};

int run_bench(const BenchArgs& a) {
  const BenchReport report = bench_throughput(load_model_config(a.model_config), a.length, a.reps);
  std::cout << bench_report_json(report);
  return kExitOk;
}

struct AblateArgs {
  std::string data;
  std::string model_config;
  std::string train_config;
  std::string out;
  std::vector<std::string> pyramid_modes{"max_only", "max_plus_avg"};
  std::vector<std::string> feature_modes{"global_only", "full"};
};

int run_ablate(const AblateArgs& a) {
  const DatasetManifest manifest = load_manifest(a.data);
  std::vector<PyramidMode> pm;
  std::vector<FeatureMode> fm;
  for (const auto& s : a.pyramid_modes) pm.push_back(parse_pyramid_mode(s));
  for (const auto& s : a.feature_modes) fm.push_back(parse_feature_mode(s));
  const auto grid = ablation_grid(pm, fm);
  const auto rows = run_ablation(manifest, grid, load_model_config(a.model_config),
                                 load_train_config(a.train_config), a.out);
  const std::string csv = ablation_csv(rows);
  if (!a.out.empty()) write_file(fs::path(a.out) / "ablation.csv", csv);
  std::cout << csv;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group activity detection on precomputed video features"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", synth.config, "SynthConfig JSON (defaults when omitted)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Override the config seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a detector");
  train_cmd->add_option("--data", tr.data, "Dataset manifest")->required();
  train_cmd->add_option("--model-config", tr.model_config, "ModelConfig JSON");
  train_cmd->add_option("--train-config", tr.train_config, "TrainConfig JSON");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Override the number of epochs");
  train_cmd->add_option("--seed", tr.seed, "Override the training seed");
  train_cmd->add_option("--threads", tr.threads, "Worker threads; 1 is the reproducibility mode");
  train_cmd->add_flag("--quiet", tr.quiet, "Suppress per-epoch progress");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Average precision on the test split");
  eval_cmd->add_option("--data", ev.data, "Dataset manifest")->required();
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--thresholds", ev.thresholds, "Comma-separated tIoU thresholds");
  eval_cmd->add_option("--out", ev.out, "CSV report path");
  eval_cmd->add_option("--threads", ev.threads, "Worker threads");

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "Detect activities in one feature file");
  detect_cmd->add_option("--features", det.features, "Feature file")->required();
  detect_cmd->add_option("--ckpt", det.ckpt, "Checkpoint")->required();
  detect_cmd->add_option("--out", det.out, "Detection JSON path")->required();

  ClipEvalArgs ce;
  auto* clip_cmd = app.add_subcommand("clip-eval", "FPR at 95% recall on fixed-length clips");
  clip_cmd->add_option("--data", ce.data, "Dataset manifest")->required();
  clip_cmd->add_option("--ckpt", ce.ckpt, "Checkpoint")->required();
  clip_cmd->add_option("--clip-len", ce.clip_len, "Clip length in seconds");
  clip_cmd->add_option("--split", ce.split, "train or test");

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "Inference throughput");
  bench_cmd->add_option("--model-config", be.model_config, "ModelConfig JSON");
  bench_cmd->add_option("--T", be.length, "Feature sequence length");
  bench_cmd->add_option("--reps", be.reps, "Repetitions");

  AblateArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate an ablation grid");
  ablate_cmd->add_option("--data", ab.data, "Dataset manifest")->required();
  ablate_cmd->add_option("--model-config", ab.model_config, "ModelConfig JSON");
  ablate_cmd->add_option("--train-config", ab.train_config, "TrainConfig JSON");
  ablate_cmd->add_option("--out", ab.out, "Output directory");
  ablate_cmd->add_option("--pyramid-modes", ab.pyramid_modes, "max_only / avg_only / max_plus_avg");
  ablate_cmd->add_option("--feature-modes", ab.feature_modes, "full / global_only / local_only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*detect_cmd) return run_detect(det);
    if (*clip_cmd) return run_clip_eval(ce);
    if (*bench_cmd) return run_bench(be);
    if (*ablate_cmd) return run_ablate(ab);
  } catch (const GenerationError& e) {
    std::cerr << "generation error: " << e.what() << "\n";
    return kExitGeneration;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}

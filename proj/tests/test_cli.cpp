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
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gadet/checkpoint.hpp"
#include "gadet/config_io.hpp"
#include "gadet/manifest.hpp"
#include "test_support.hpp"

using gadet::testing::TempDir;
using gadet::testing::write_text;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run(const TempDir& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(GADET_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

const char* kSmallSynth = R"({
  "n_videos": 6,
  "video_duration_range_s": [300, 400],
  "D": 8,
  "d_g": 6,
  "class_stats": {"time_out": {"mean_duration_s": 60, "sd_duration_s": 15, "expected_count_per_video": 1},
                  "stop": {"mean_duration_s": 40, "sd_duration_s": 10, "expected_count_per_video": 1}},
  "train_fraction": 0.5,
  "seed": 3
})";

const char* kSmallModel = R"({"backbone_width": 16, "head_width": 16, "pyramid_levels": 5})";

const char* kQuickTrain = R"({"epochs": 2, "warmup_epochs": 1, "learning_rate": 0.001, "eval_every": 0})";

struct Workspace {
  TempDir dir{"cli"};
  Workspace() {
    write_text(dir / "synth.json", kSmallSynth);
    write_text(dir / "model.json", kSmallModel);
    write_text(dir / "train.json", kQuickTrain);
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("synth writes a dataset and prints the split table") {
  Workspace w;
  const auto r = run(w.dir, "synth --config " + w.p("synth.json") + " --out " + w.p("data"));
  CHECK(r.code == 0);
  CHECK(r.out.find("train") != std::string::npos);
  CHECK(r.out.find("Time-out") != std::string::npos);
  CHECK(fs::exists(w.dir / "data" / "manifest.json"));
  CHECK(fs::exists(w.dir / "data" / "video_005.tmf"));

  const auto again = run(w.dir, "synth --config " + w.p("synth.json") + " --out " + w.p("data2"));
  CHECK(again.code == 0);
  for (const auto& entry : fs::directory_iterator(w.dir / "data")) {
    CHECK(gadet::testing::read_bytes(entry.path()) ==
          gadet::testing::read_bytes(w.dir / "data2" / entry.path().filename()));
  }
}

TEST_CASE("synth error contract") {
  Workspace w;
  write_text(w.dir / "bad.json", "{\n  \"n_videos\": 3,\n  \"snr\": oops\n}\n");
  const auto bad = run(w.dir, "synth --config " + w.p("bad.json") + " --out " + w.p("x"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bad.json:3:") != std::string::npos);

  write_text(w.dir / "crowded.json",
             R"({"video_duration_range_s": [300, 301], "class_stats": {"time_out": {"expected_count_per_video": 40}}})");
  const auto crowded = run(w.dir, "synth --config " + w.p("crowded.json") + " --out " + w.p("y"));
  CHECK(crowded.code == 3);

  const auto missing = run(w.dir, "synth --config " + w.p("nope.json") + " --out " + w.p("z"));
  CHECK(missing.code == 2);
}

TEST_CASE("train, eval, detect, clip-eval") {
  Workspace w;
  REQUIRE(run(w.dir, "synth --config " + w.p("synth.json") + " --out " + w.p("data")).code == 0);
  const std::string data = w.p("data/manifest.json");

  const auto init = run(w.dir, "train --data " + data + " --model-config " + w.p("model.json") + " --train-config " +
                                   w.p("train.json") + " --epochs 0 --out " + w.p("run0"));
  CHECK(init.code == 0);
  REQUIRE(fs::exists(w.dir / "run0" / "final.ckpt"));

  const auto trained = run(w.dir, "train --data " + data + " --model-config " + w.p("model.json") +
                                      " --train-config " + w.p("train.json") + " --out " + w.p("run") + " --quiet");
  CHECK(trained.code == 0);
  CHECK(fs::exists(w.dir / "run" / "metrics.csv"));

  SUBCASE("eval") {
    const auto r = run(w.dir, "eval --data " + data + " --ckpt " + w.p("run/final.ckpt") + " --out " + w.p("ap.csv"));
    CHECK(r.code == 0);
    CHECK(r.out.find("Avg.") != std::string::npos);
    CHECK(slurp(w.dir / "ap.csv").rfind("class,tau,ap\n", 0) == 0);

    const auto custom = run(w.dir, "eval --data " + data + " --ckpt " + w.p("run/final.ckpt") + " --thresholds 0.3,0.7");
    CHECK(custom.code == 0);
    CHECK(custom.out.find("time_out,0.7,") != std::string::npos);
  }
  SUBCASE("eval on an empty test split") {
    auto m = gadet::load_manifest(data);
    for (auto& v : m.videos) v.split = gadet::Split::kTrain;
    gadet::save_manifest(m, w.dir / "data" / "all_train.json");
    const auto r = run(w.dir, "eval --data " + w.p("data/all_train.json") + " --ckpt " + w.p("run/final.ckpt"));
    CHECK(r.code == 2);
  }
  SUBCASE("eval with a mismatched checkpoint") {
    write_text(w.dir / "wide.json", R"({"backbone_width": 8, "head_width": 8, "pyramid_levels": 3, "input_dim": 5})");
    auto params = gadet::init_params<float>(
        gadet::model_config_from_json(nlohmann::json::parse(slurp(w.dir / "wide.json"))), 1);
    gadet::save_checkpoint(params, w.dir / "wide.ckpt");
    const auto r = run(w.dir, "eval --data " + data + " --ckpt " + w.p("wide.ckpt"));
    CHECK(r.code == 2);

    write_text(w.dir / "garbage.ckpt", "not a checkpoint");
    CHECK(run(w.dir, "eval --data " + data + " --ckpt " + w.p("garbage.ckpt")).code == 2);
  }
  SUBCASE("detect") {
    const auto r = run(w.dir, "detect --features " + w.p("data/video_000.tmf") + " --ckpt " + w.p("run/final.ckpt") +
                                  " --out " + w.p("det.json"));
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(slurp(w.dir / "det.json"));
    REQUIRE(doc.is_array());
    double prev = 2.0;
    for (const auto& d : doc) {
      CHECK(d.at("video_id") == "video_000");
      CHECK(d.at("score").get<double>() <= prev);
      prev = d.at("score").get<double>();
    }
    CHECK(run(w.dir, "detect --features " + w.p("data/none.tmf") + " --ckpt " + w.p("run/final.ckpt") + " --out " +
                         w.p("d2.json"))
              .code == 2);
  }
  SUBCASE("untrained detector stays at low confidence") {
    const auto r = run(w.dir, "detect --features " + w.p("data/video_000.tmf") + " --ckpt " + w.p("run0/final.ckpt") +
                                  " --out " + w.p("det0.json"));
    CHECK(r.code == 0);
    for (const auto& d : nlohmann::json::parse(slurp(w.dir / "det0.json"))) CHECK(d.at("score").get<double>() < 0.05);
  }
  SUBCASE("clip-eval") {
    const auto r = run(w.dir, "clip-eval --data " + data + " --ckpt " + w.p("run/final.ckpt") + " --split train");
    CHECK(r.code == 0);
    CHECK(r.out.find("FPR at 95% recall") != std::string::npos);

    auto m = gadet::load_manifest(data);
    for (auto& v : m.videos) v.segments.clear();
    gadet::save_manifest(m, w.dir / "data" / "empty.json");
    CHECK(run(w.dir, "clip-eval --data " + w.p("data/empty.json") + " --ckpt " + w.p("run/final.ckpt")).code == 2);
  }
}

TEST_CASE("train error contract") {
  Workspace w;
  REQUIRE(run(w.dir, "synth --config " + w.p("synth.json") + " --out " + w.p("data")).code == 0);
  fs::remove(w.dir / "data" / "video_001.tmf");
  const auto r = run(w.dir, "train --data " + w.p("data/manifest.json") + " --model-config " + w.p("model.json") +
                                " --epochs 1 --out " + w.p("run"));
  CHECK(r.code == 2);
  CHECK(r.err.find("video_001.tmf") != std::string::npos);
}

TEST_CASE("train divergence exits with 4") {
  Workspace w;
  REQUIRE(run(w.dir, "synth --config " + w.p("synth.json") + " --out " + w.p("data")).code == 0);
  write_text(w.dir / "explode.json",
             R"({"epochs": 3, "warmup_epochs": 0, "learning_rate": 1e37, "weight_decay": 0, "eval_every": 0})");
  const auto r = run(w.dir, "train --data " + w.p("data/manifest.json") + " --model-config " + w.p("model.json") +
                                " --train-config " + w.p("explode.json") + " --out " + w.p("run"));
  CHECK(r.code == 4);
  CHECK(r.err.find("step") != std::string::npos);
}

TEST_CASE("bench prints a throughput report") {
  Workspace w;
  const auto r = run(w.dir, "bench --model-config " + w.p("model.json") + " --T 256 --reps 3");
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("wall_s").contains("median"));
  CHECK(doc.at("wall_s").contains("p95"));
  CHECK(doc.at("video_s_per_wall_s").at("median").get<double>() > 0.0);
  CHECK(doc.at("T") == 256);
}

TEST_CASE("ablate emits one row per cell") {
  Workspace w;
  REQUIRE(run(w.dir, "synth --config " + w.p("synth.json") + " --out " + w.p("data")).code == 0);
  write_text(w.dir / "one.json", R"({"epochs": 1, "warmup_epochs": 0, "learning_rate": 0.001})");
  const auto r = run(w.dir, "ablate --data " + w.p("data/manifest.json") + " --model-config " + w.p("model.json") +
                                " --train-config " + w.p("one.json") + " --out " + w.p("abl"));
  CHECK(r.code == 0);
  const std::string csv = slurp(w.dir / "abl" / "ablation.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("usage errors") {
  Workspace w;
  CHECK(run(w.dir, "").code != 0);
  CHECK(run(w.dir, "train").code != 0);
}

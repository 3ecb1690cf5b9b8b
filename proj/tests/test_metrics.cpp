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

#include <algorithm>
#include <cmath>

#include "gadet/errors.hpp"
#include "gadet/metrics.hpp"
#include "metric_oracles.hpp"
#include "test_support.hpp"

using namespace gadet;

TEST_CASE("average precision hand examples") {
  const std::vector<LabeledSegment> gt = {{"a", {ActivityClass::kTimeOut, 10, 20}}};
  SUBCASE("single hit") {
    const std::vector<Proposal> p = {{"a", ActivityClass::kTimeOut, 11, 20, 0.9}};
    CHECK(average_precision(p, gt, ActivityClass::kTimeOut, 0.5) == 1.0);
  }
  SUBCASE("false positive ranked first") {
    const std::vector<Proposal> p = {{"a", ActivityClass::kTimeOut, 50, 60, 0.9},
                                     {"a", ActivityClass::kTimeOut, 10, 20, 0.8}};
    CHECK(average_precision(p, gt, ActivityClass::kTimeOut, 0.5) == 0.5);
  }
  SUBCASE("no ground truth") {
    const std::vector<Proposal> p = {{"a", ActivityClass::kStop, 10, 20, 0.9}};
    CHECK(std::isnan(average_precision(p, gt, ActivityClass::kStop, 0.5)));
  }
  SUBCASE("wrong video never matches") {
    const std::vector<Proposal> p = {{"b", ActivityClass::kTimeOut, 10, 20, 0.9}};
    CHECK(average_precision(p, gt, ActivityClass::kTimeOut, 0.1) == 0.0);
  }
  SUBCASE("duplicates are false positives") {
    const std::vector<Proposal> p = {{"a", ActivityClass::kTimeOut, 10, 20, 0.9},
                                     {"a", ActivityClass::kTimeOut, 10, 20, 0.8}};
    CHECK(average_precision(p, gt, ActivityClass::kTimeOut, 0.5) == 1.0);
  }
}

TEST_CASE("average precision equals the brute-force oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = gadet::testing::random_ap_instance(rng);
    for (double tau : {0.1, 0.3, 0.5, 0.7}) {
      for (ActivityClass c : {ActivityClass::kTimeOut, ActivityClass::kStop}) {
        const double got = average_precision(inst.proposals, inst.ground_truth, c, tau);
        const double want = gadet::testing::brute_force_ap(inst.proposals, inst.ground_truth, c, tau);
        if (std::isnan(want)) {
          CHECK(std::isnan(got));
        } else {
          CHECK(got == want);
        }
      }
    }
  }
}

TEST_CASE("average precision invariances") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = gadet::testing::random_ap_instance(rng);
    const double base = average_precision(inst.proposals, inst.ground_truth, ActivityClass::kTimeOut, 0.3);
    if (std::isnan(base)) continue;
    auto shuffled = inst.proposals;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    CHECK(average_precision(shuffled, inst.ground_truth, ActivityClass::kTimeOut, 0.3) == base);
    double prev = 2.0;
    for (double tau = 0.05; tau <= 1.0; tau += 0.05) {
      const double ap = average_precision(inst.proposals, inst.ground_truth, ActivityClass::kTimeOut, tau);
      CHECK(ap <= prev);
      CHECK(ap >= 0.0);
      CHECK(ap <= 1.0);
      prev = ap;
    }
  }
}

TEST_CASE("FPR at 95% recall") {
  const std::vector<double> scores = {0.9, 0.8, 0.7, 0.1};
  const std::vector<int> labels = {1, 0, 1, 0};
  CHECK(fpr_at_recall(scores, labels, 0.95) == 0.5);

  const std::vector<double> separated = {0.9, 0.8, 0.3, 0.2};
  const std::vector<int> sep_labels = {1, 1, 0, 0};
  CHECK(fpr_at_recall(separated, sep_labels, 0.95) == 0.0);

  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  CHECK(fpr_at_recall(flat, labels, 0.95) == 1.0);

  const std::vector<int> none = {0, 0, 0, 0};
  CHECK_THROWS_AS(fpr_at_recall(scores, none, 0.95), MetricError);
}

TEST_CASE("FPR is monotone in the recall target") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      y.push_back(rng.uniform() < 0.4 ? 1 : 0);
      s.push_back(std::round(rng.uniform() * 10.0) / 10.0 + 0.3 * y.back());
    }
    if (std::count(y.begin(), y.end(), 1) == 0) continue;
    double prev = -1.0;
    for (double r = 0.05; r <= 1.0; r += 0.05) {
      const double f = fpr_at_recall(s, y, r);
      CHECK(f >= prev);
      prev = f;
    }
  }
}

TEST_CASE("random rankings give FPR-95 near 0.95") {
  Rng rng(9);
  double total = 0.0;
  const int runs = 400;
  for (int run = 0; run < runs; ++run) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
      y.push_back(i % 2);
      s.push_back(rng.uniform());
    }
    total += fpr_at_recall(s, y, 0.95);
  }
  CHECK(total / runs == doctest::Approx(0.95).epsilon(0.02));
}

TEST_CASE("clip split") {
  FeatureSequence video;
  video.video_id = "v";
  video.feature_fps = 1.0f;
  video.global_dim = 1;
  SUBCASE("exact division") {
    video.features = FeatureMatrix::Zero(90, 2);
    video.duration_s = 90.0f;
    const std::vector<Segment> segs = {{ActivityClass::kStop, 30.0, 60.0}};
    const auto clips = clip_split(video, segs, 30.0);
    REQUIRE(clips.size() == 3);
    CHECK(clips[0].label[1] == 0);
    CHECK(clips[1].label[1] == 1);
    CHECK(clips[2].label[1] == 0);
    CHECK(clips[1].label[0] == 0);
    CHECK(clips[1].features.rows() == 30);
  }
  SUBCASE("remainder dropped") {
    video.features = FeatureMatrix::Zero(100, 2);
    video.duration_s = 100.0f;
    const auto clips = clip_split(video, {}, 30.0);
    CHECK(clips.size() == 3);
    CHECK(clips.back().end_s == 90.0);
  }
  SUBCASE("half coverage is positive") {
    video.features = FeatureMatrix::Zero(60, 2);
    video.duration_s = 60.0f;
    const std::vector<Segment> segs = {{ActivityClass::kTimeOut, 15.0, 44.0}};
    const auto clips = clip_split(video, segs, 30.0);
    CHECK(clips[0].label[0] == 1);  // 15 s of 30
    CHECK(clips[1].label[0] == 0);  // 14 s of 30
  }
}

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

#include <cmath>

#include "gadet/assign.hpp"
#include "gadet/loss.hpp"
#include "gadet/metrics.hpp"
#include "test_support.hpp"

using namespace gadet;

namespace {

constexpr double kFps = 30.0 / 32.0;

HeadOutputs<double> outputs_like(const MomentTargets& targets, double logit, double offset) {
  HeadOutputs<double> out;
  for (const auto& lt : targets.levels) {
    const auto n = static_cast<Eigen::Index>(lt.label.size());
    out.levels.push_back({lt.stride, Matrix<double>::Constant(n, kNumActivityClasses, logit),
                          Matrix<double>::Constant(n, 2, offset)});
  }
  return out;
}

double logit_of(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("default regression ranges") {
  const AssignmentConfig cfg;
  const double inf = std::numeric_limits<double>::infinity();
  const std::pair<double, double> expected[] = {{0, 4}, {4, 8}, {8, 16}, {16, 32}, {32, 64}, {64, 128}, {128, inf}};
  for (int l = 0; l < 7; ++l) CHECK(cfg.range(l, 7) == expected[l]);
  CHECK(cfg.range(0, 1) == std::pair<double, double>{0, inf});
}

TEST_CASE("no segments means all negatives") {
  const auto geometry = pyramid_geometry(100, 7);
  const MomentTargets t = assign_targets({}, geometry, kFps, {});
  CHECK(t.num_positive == 0);
  CHECK(t.num_negative == 100 + 50 + 25 + 13 + 7 + 4 + 2);
}

TEST_CASE("a 90 s activity lands on the level whose range holds its reach") {
  // centre at grid step 640, a multiple of every stride
  const double centre = 640.0 / kFps;
  const std::vector<Segment> segs = {{ActivityClass::kTimeOut, centre - 45.0, centre + 45.0}};
  const auto geometry = pyramid_geometry(1400, 7);
  const MomentTargets t = assign_targets(segs, geometry, kFps, {});
  const double reach = 45.0 * kFps;
  CHECK(reach == doctest::Approx(42.1875));
  for (int l = 0; l < 7; ++l) {
    const auto& lt = t.levels[static_cast<std::size_t>(l)];
    const std::size_t i = 640 / static_cast<std::size_t>(lt.stride);
    const auto [lo, hi] = AssignmentConfig{}.range(l, 7);
    const bool expect_positive = reach > lo && reach <= hi;
    CHECK((lt.label[i] == 0) == expect_positive);
    if (expect_positive) {
      CHECK(l == 4);  // (32, 64]
      // centred moment: both offsets equal half the duration in stride units
      CHECK(lt.offsets(static_cast<Eigen::Index>(i), 0) == doctest::Approx(45.0 * kFps / lt.stride));
      CHECK(lt.offsets(static_cast<Eigen::Index>(i), 1) == doctest::Approx(45.0 * kFps / lt.stride));
    }
  }
}

TEST_CASE("positives satisfy every assignment condition") {
  Rng rng(3);
  const AssignmentConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    const double duration = 1000.0;
    std::vector<Segment> segs;
    for (int k = 0; k < 4; ++k) {
      const double len = rng.uniform(2.0, 200.0);
      const double start = rng.uniform(0.0, duration - len);
      segs.push_back({activity_class_from_index(k % 2), start, start + len});
    }
    const auto geometry = pyramid_geometry(static_cast<Eigen::Index>(duration * kFps), 7);
    const MomentTargets t = assign_targets(segs, geometry, kFps, cfg);
    int positives = 0;
    for (int l = 0; l < 7; ++l) {
      const auto& lt = t.levels[static_cast<std::size_t>(l)];
      const auto [lo, hi] = cfg.range(l, 7);
      for (std::size_t i = 0; i < lt.label.size(); ++i) {
        if (lt.label[i] == kNegative) continue;
        ++positives;
        const Segment& s = segs[static_cast<std::size_t>(lt.segment[i])];
        const double time = static_cast<double>(i) * lt.stride / kFps;
        CHECK(time > s.start_s);
        CHECK(time < s.end_s);
        CHECK(std::abs(time - 0.5 * (s.start_s + s.end_s)) <= cfg.center_radius * lt.stride / kFps + 1e-9);
        const double reach = std::max(time - s.start_s, s.end_s - time) * kFps;
        CHECK(reach > lo);
        CHECK(reach <= hi);
        CHECK(lt.offsets(static_cast<Eigen::Index>(i), 0) > 0.0);
        CHECK(lt.offsets(static_cast<Eigen::Index>(i), 1) > 0.0);
        CHECK(lt.label[i] == class_index(s.label));
      }
    }
    CHECK(positives == t.num_positive);
  }
}

TEST_CASE("overlapping candidates go to the shortest segment") {
  const std::vector<Segment> segs = {{ActivityClass::kTimeOut, 0.0, 20.0}, {ActivityClass::kStop, 8.0, 12.0}};
  const auto geometry = pyramid_geometry(20, 1);
  AssignmentConfig cfg;
  cfg.center_radius = 100.0;
  const MomentTargets t = assign_targets(segs, geometry, 1.0, cfg);
  CHECK(t.levels[0].label[10] == class_index(ActivityClass::kStop));
  CHECK(t.levels[0].segment[10] == 1);
  CHECK(t.levels[0].label[5] == class_index(ActivityClass::kTimeOut));
}

TEST_CASE("assignment is scale consistent") {
  Rng rng(4);
  const std::vector<Segment> segs = {{ActivityClass::kTimeOut, 100.0, 190.0}, {ActivityClass::kStop, 400.0, 460.0}};
  const auto geometry = pyramid_geometry(600, 7);
  const MomentTargets a = assign_targets(segs, geometry, kFps, {});
  const double factor = 2.5;
  std::vector<Segment> scaled = segs;
  for (auto& s : scaled) {
    s.start_s *= factor;
    s.end_s *= factor;
  }
  const MomentTargets b = assign_targets(scaled, geometry, kFps / factor, {});
  CHECK(a.num_positive == b.num_positive);
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    CHECK(a.levels[l].label == b.levels[l].label);
    CHECK(a.levels[l].offsets.isApprox(b.levels[l].offsets, 1e-12));
  }
}

TEST_CASE("focal loss hand values") {
  CHECK(focal_loss(0.5, 1, 0.0) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(focal_loss(0.9, 0, 2.0) == doctest::Approx(-0.81 * std::log(0.1)).epsilon(1e-12));
  CHECK(std::abs(focal_loss(0.9, 0, 2.0) - 1.865) < 1e-3);
  CHECK(focal_loss(1.0, 1, 2.0) < 1e-20);
  CHECK(focal_loss(0.0, 0, 2.0) < 1e-20);
  CHECK(std::isfinite(focal_loss(0.0, 1, 2.0)));  // clamped
}

TEST_CASE("focal loss monotonicity and cross-entropy reduction") {
  Rng rng(5);
  double prev1 = std::numeric_limits<double>::infinity();
  double prev0 = -1.0;
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    CHECK(focal_loss(p, 1, 2.0) <= prev1);
    CHECK(focal_loss(p, 0, 2.0) >= prev0);
    prev1 = focal_loss(p, 1, 2.0);
    prev0 = focal_loss(p, 0, 2.0);
    CHECK(std::abs(focal_loss(p, 1, 0.0) + std::log(p)) < 1e-12);
    CHECK(std::abs(focal_loss(p, 0, 0.0) + std::log(1.0 - p)) < 1e-12);
  }
}

TEST_CASE("focal loss logit gradient matches finite differences") {
  const double h = 1e-6;
  for (double gamma : {0.0, 1.0, 2.0}) {
    for (int y : {0, 1}) {
      for (double z = -6.0; z <= 6.0; z += 0.37) {
        const auto f = [&](double x) { return focal_loss(1.0 / (1.0 + std::exp(-x)), y, gamma); };
        const double numeric = (f(z + h) - f(z - h)) / (2.0 * h);
        CHECK(focal_loss_grad_logit(z, y, gamma) == doctest::Approx(numeric).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("tIoU and DIoU hand values") {
  CHECK(tiou({0, 10}, {5, 15}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(tiou({0, 10}, {0, 10}) == 1.0);
  CHECK(tiou({0, 1}, {2, 3}) == 0.0);
  CHECK(diou_loss({0, 10}, {5, 15}) == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(diou_loss({3, 8}, {3, 8}) == 0.0);
  CHECK(diou_loss({0, 1}, {1e6, 1e6 + 1}) > 1.99);
  CHECK(diou_loss({0, 1}, {1e6, 1e6 + 1}) < 2.0);
  // degenerate prediction collapses to a point
  const double d = diou_loss({5, 5}, {0, 4});
  CHECK(d == doctest::Approx(1.0 + 9.0 / 25.0));
}

TEST_CASE("DIoU properties") {
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const double a1 = rng.uniform(-10, 10), b1 = rng.uniform(-10, 10);
    const Interval a{a1, a1 + rng.uniform(0.01, 10)};
    const Interval b{b1, b1 + rng.uniform(0.01, 10)};
    const double ab = diou_loss(a, b);
    CHECK(ab == doctest::Approx(diou_loss(b, a)).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab < 2.0);
    CHECK(ab > 0.0);

    const double h = 1e-6;
    const auto [g1, g2] = diou_loss_grad(a, b);
    const double n1 = (diou_loss({a.start + h, a.end}, b) - diou_loss({a.start - h, a.end}, b)) / (2 * h);
    const double n2 = (diou_loss({a.start, a.end + h}, b) - diou_loss({a.start, a.end - h}, b)) / (2 * h);
    CHECK(g1 == doctest::Approx(n1).epsilon(1e-4).scale(1.0));
    CHECK(g2 == doctest::Approx(n2).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("total loss hand example") {
  // one positive (class 0, p=0.5, exact regression) and one negative at the clamp
  MomentTargets targets;
  LevelTargets lt;
  lt.stride = 1;
  lt.label = {0, kNegative};
  lt.segment = {0, kNegative};
  lt.offsets = Matrix<double>(2, 2);
  lt.offsets << 3.0, 4.0, 0.0, 0.0;
  lt.sigma_iou = {0.0, 0.0};
  targets.levels.push_back(lt);
  targets.num_positive = 1;
  targets.num_negative = 1;

  HeadOutputs<double> out;
  Matrix<double> logits(2, 2);
  const double tiny = logit_of(1e-9);
  logits << 0.0, tiny, tiny, tiny;
  Matrix<double> offsets(2, 2);
  offsets << 3.0, 4.0, 1.0, 1.0;
  out.levels.push_back({1, logits, offsets});

  const LossBreakdown loss = total_loss(out, targets, {});
  CHECK(targets.levels[0].sigma_iou[0] == doctest::Approx(1.0));
  CHECK(loss.reg == doctest::Approx(0.0));
  CHECK(loss.cls_neg < 1e-12);
  CHECK(loss.total == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-9));
  CHECK(std::abs(loss.total - 0.1733) < 1e-4);
  CHECK(loss.num_positive == 1);
  CHECK(loss.num_negative == 1);
}

TEST_CASE("total loss edge cases") {
  const auto geometry = pyramid_geometry(40, 3);
  SUBCASE("perfect negatives") {
    MomentTargets t = assign_targets({}, geometry, 1.0, {});
    const auto out = outputs_like(t, -40.0, 1.0);
    const LossBreakdown loss = total_loss(out, t, {});
    CHECK(loss.total < 1e-10);
    CHECK(loss.cls_pos == 0.0);
    CHECK(loss.reg == 0.0);
  }
  SUBCASE("perfect positive") {
    const std::vector<Segment> segs = {{ActivityClass::kStop, 10.2, 13.9}};
    MomentTargets t = assign_targets(segs, geometry, 1.0, {});
    REQUIRE(t.num_positive > 0);
    auto out = outputs_like(t, -40.0, 1.0);
    for (std::size_t l = 0; l < t.levels.size(); ++l) {
      for (std::size_t i = 0; i < t.levels[l].label.size(); ++i) {
        if (t.levels[l].label[i] == kNegative) continue;
        out.levels[l].logits(static_cast<Eigen::Index>(i), 1) = 40.0;
        out.levels[l].offsets.row(static_cast<Eigen::Index>(i)) = t.levels[l].offsets.row(static_cast<Eigen::Index>(i));
      }
    }
    const LossBreakdown loss = total_loss(out, t, {});
    CHECK(loss.total < 1e-6);
  }
}

TEST_CASE("total loss head gradient matches finite differences") {
  Rng rng(7);
  const auto geometry = pyramid_geometry(24, 3);
  const std::vector<Segment> segs = {{ActivityClass::kTimeOut, 2.2, 9.7}, {ActivityClass::kStop, 13.1, 21.6}};
  MomentTargets t = assign_targets(segs, geometry, 1.0, {});
  auto out = outputs_like(t, 0.0, 1.0);
  for (auto& l : out.levels) {
    for (Eigen::Index i = 0; i < l.logits.size(); ++i) l.logits.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < l.offsets.size(); ++i) l.offsets.data()[i] = rng.uniform(0.2, 5.0);
  }
  HeadOutputs<double> grad;
  total_loss(out, t, {}, &grad);
  t.sigma_frozen = true;
  const double h = 1e-6;
  for (std::size_t l = 0; l < out.levels.size(); ++l) {
    for (Matrix<double> HeadLevel<double>::*field : {&HeadLevel<double>::logits, &HeadLevel<double>::offsets}) {
      Matrix<double>& values = out.levels[l].*field;
      const Matrix<double>& g = grad.levels[l].*field;
      for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double x = values.data()[i];
        values.data()[i] = x + h;
        const double up = total_loss(out, t, {}).total;
        values.data()[i] = x - h;
        const double down = total_loss(out, t, {}).total;
        values.data()[i] = x;
        CHECK(g.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1e-3));
      }
    }
  }
}

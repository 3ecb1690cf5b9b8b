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
#include <cstring>
#include <utility>

#include "gadet/checkpoint.hpp"
#include "gadet/errors.hpp"
#include "gadet/gradcheck.hpp"
#include "gadet/network.hpp"
#include "test_support.hpp"

using namespace gadet;

namespace {

ModelConfig tiny_config(int levels = 3) {
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.backbone_width = 8;
  cfg.head_width = 8;
  cfg.pyramid_levels = levels;
  return cfg;
}

template <typename S>
Matrix<S> random_input(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix<S> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(rng.normal());
  return m;
}

template <typename S>
bool bit_equal(const Matrix<S>& a, const Matrix<S>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(S) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("pyramid geometry for T=100, L=7") {
  const auto g = pyramid_geometry(100, 7);
  REQUIRE(g.size() == 7);
  const Eigen::Index lengths[] = {128, 64, 32, 16, 8, 4, 2};
  const Eigen::Index valid[] = {100, 50, 25, 13, 7, 4, 2};
  for (int l = 0; l < 7; ++l) {
    CHECK(g[l].stride == (1 << l));
    CHECK(g[l].length == lengths[l]);
    CHECK(g[l].valid_length == valid[l]);
  }
}

TEST_CASE("pyramid geometry halves exactly and follows the ceil recursion") {
  for (Eigen::Index t = 1; t <= 10000; t += (t < 600 ? 1 : 37)) {
    for (int levels = 1; levels <= 8; ++levels) {
      const auto g = pyramid_geometry(t, levels);
      const Eigen::Index top = Eigen::Index{1} << (levels - 1);
      CHECK(g[0].length % top == 0);
      CHECK(g[0].length >= t);
      CHECK(g[0].length - t < top);
      CHECK(g[0].valid_length == t);
      for (int l = 1; l < levels; ++l) {
        CHECK(g[l].length * 2 == g[l - 1].length);
        CHECK(g[l].valid_length == (g[l - 1].valid_length + 1) / 2);
      }
    }
  }
}

TEST_CASE("init is deterministic with the prior classification bias") {
  const ModelConfig cfg;
  const auto a = init_params<float>(cfg, 11);
  const auto b = init_params<float>(cfg, 11);
  CHECK(encode_checkpoint(a) == encode_checkpoint(b));
  CHECK(encode_checkpoint(a) != encode_checkpoint(init_params<float>(cfg, 12)));

  const double bias = a.cls_head.proj.bias(0, 0);
  CHECK(bias == doctest::Approx(-std::log(99.0)).epsilon(1e-6));
  CHECK(bias == doctest::Approx(-4.595).epsilon(1e-3));
  CHECK(1.0 / (1.0 + std::exp(-bias)) == doctest::Approx(0.01).epsilon(1e-5));
  for (const auto& t : a.tensors()) {
    if (t.name.ends_with(".gain")) CHECK((t.value->array() == 1.0f).all());
    if (t.name.ends_with(".offset")) CHECK((t.value->array() == 0.0f).all());
    if (t.name.ends_with(".weight")) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.value->rows()));
      CHECK(t.value->cwiseAbs().maxCoeff() <= bound);
    }
  }
  // 64 -> 256 backbone, two 256-wide head blocks per head
  CHECK(a.parameter_count() > 1'000'000);
}

TEST_CASE("initial class probabilities sit at the prior") {
  ModelConfig cfg = tiny_config();
  Rng rng(5);
  const auto params = init_params<double>(cfg, 3);
  // zero the projection weights so only the bias speaks
  auto p = params;
  p.cls_head.proj.weight.setZero();
  const auto fr = forward(p, random_input<double>(rng, 20, 4));
  for (const auto& level : fr.outputs.levels) {
    for (Eigen::Index i = 0; i < level.logits.size(); ++i) {
      CHECK(1.0 / (1.0 + std::exp(-level.logits.data()[i])) == doctest::Approx(0.01).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant input gives equal branches") {
  ModelConfig cfg = tiny_config(4);
  cfg.kernel_size = 1;  // no zero-padding edge effects, so Z^1 is constant in time
  const auto params = init_params<double>(cfg, 2);
  const Matrix<double> input = Matrix<double>::Constant(32, 4, 0.7);
  const auto fr = forward(params, input);
  for (const auto& level : fr.pyramid.levels) {
    CHECK(level.max_branch.isApprox(level.avg_branch, 1e-12));
    CHECK(level.fused.isApprox(2.0 * level.max_branch, 1e-12));
  }
}

TEST_CASE("max branch dominates the average branch") {
  const ModelConfig cfg = tiny_config(5);
  Rng rng(8);
  const auto params = init_params<double>(cfg, 4);
  for (Eigen::Index t : {1, 7, 16, 37}) {
    const auto fr = forward(params, random_input<double>(rng, t, 4));
    for (const auto& level : fr.pyramid.levels) {
      const auto n = level.geometry.valid_length;
      CHECK((level.max_branch.topRows(n).array() >= level.avg_branch.topRows(n).array()).all());
    }
  }
}

TEST_CASE("pyramid modes select branches") {
  ModelConfig cfg = tiny_config(3);
  Rng rng(9);
  const Matrix<double> input = random_input<double>(rng, 12, 4);
  for (PyramidMode mode : {PyramidMode::kMaxOnly, PyramidMode::kAvgOnly, PyramidMode::kMaxPlusAvg}) {
    cfg.pyramid_mode = mode;
    const auto fr = forward(init_params<double>(cfg, 1), input);
    for (const auto& level : fr.pyramid.levels) {
      const Matrix<double> expected = mode == PyramidMode::kMaxOnly   ? level.max_branch
                                      : mode == PyramidMode::kAvgOnly ? level.avg_branch
                                                                      : Matrix<double>(level.max_branch + level.avg_branch);
      CHECK(bit_equal(level.fused, expected));
    }
  }
}

TEST_CASE("padding never changes valid outputs") {
  Rng rng(10);
  for (int levels : {1, 3, 7}) {
    ModelConfig cfg = tiny_config(levels);
    const auto params = init_params<float>(cfg, 6);
    for (Eigen::Index t : {1, 5, 63, 64, 65, 100, 200}) {
      const Matrix<float> input = random_input<float>(rng, t, 4);
      const auto reference = forward(params, input);
      Matrix<float> padded = random_input<float>(rng, t + 70, 4);  // garbage beyond t
      padded.topRows(t) = input;
      const auto fr = forward(params, padded, t);
      REQUIRE(fr.outputs.levels.size() == reference.outputs.levels.size());
      for (std::size_t l = 0; l < fr.outputs.levels.size(); ++l) {
        CHECK(bit_equal(fr.outputs.levels[l].logits, reference.outputs.levels[l].logits));
        CHECK(bit_equal(fr.outputs.levels[l].offsets, reference.outputs.levels[l].offsets));
      }
    }
  }
}

TEST_CASE("backbone is translation equivariant by one top stride") {
  const ModelConfig cfg = tiny_config(3);
  const Eigen::Index shift = cfg.top_stride();
  Rng rng(12);
  const auto params = init_params<double>(cfg, 7);
  const Matrix<double> input = random_input<double>(rng, 64, 4);
  Matrix<double> shifted = Matrix<double>::Zero(64 + shift, 4);
  shifted.bottomRows(64) = input;
  const auto a = forward(params, input);
  const auto b = forward(params, shifted);
  for (std::size_t l = 0; l < a.outputs.levels.size(); ++l) {
    const Eigen::Index offset = shift >> l;
    const auto& la = a.outputs.levels[l];
    const auto& lb = b.outputs.levels[l];
    // interior only: skip the receptive-field margin at both ends
    const Eigen::Index margin = 8;
    for (Eigen::Index i = margin; i < la.logits.rows() - margin; ++i) {
      CHECK(la.logits.row(i).isApprox(lb.logits.row(i + offset), 1e-12));
      CHECK(la.offsets.row(i).isApprox(lb.offsets.row(i + offset), 1e-12));
    }
  }
}

TEST_CASE("regression outputs are non-negative") {
  const ModelConfig cfg = tiny_config(3);
  Rng rng(13);
  const auto fr = forward(init_params<float>(cfg, 1), random_input<float>(rng, 30, 4));
  for (const auto& level : fr.outputs.levels) CHECK((level.offsets.array() >= 0.0f).all());
}

TEST_CASE("avg-pool gradient splits evenly over valid children") {
  PyramidLevel<double> prev;
  prev.geometry = {1, 4, 3};
  prev.max_branch = Matrix<double>(4, 1);
  prev.max_branch << 1.0, 5.0, 2.0, 0.0;
  prev.avg_branch = prev.max_branch;
  PyramidLevel<double> level;
  level.geometry = {2, 2, 2};
  pool_level(prev, level);
  CHECK(level.avg_branch(0, 0) == 3.0);
  CHECK(level.avg_branch(1, 0) == 2.0);  // padded child ignored
  CHECK(level.max_branch(0, 0) == 5.0);
  CHECK(level.max_branch(1, 0) == 2.0);

  Matrix<double> dmax = Matrix<double>::Zero(2, 1);
  Matrix<double> davg(2, 1);
  davg << 0.8, 0.6;
  Matrix<double> dmax_prev, davg_prev;
  pool_level_backward(prev, level, dmax, davg, dmax_prev, davg_prev);
  CHECK(davg_prev(0, 0) == 0.4);
  CHECK(davg_prev(1, 0) == 0.4);
  CHECK(davg_prev(2, 0) == 0.6);
  CHECK(davg_prev(3, 0) == 0.0);

  dmax << 1.5, 2.5;
  davg.setZero();
  pool_level_backward(prev, level, dmax, davg, dmax_prev, davg_prev);
  CHECK(dmax_prev(0, 0) == 0.0);
  CHECK(dmax_prev(1, 0) == 1.5);
  CHECK(dmax_prev(2, 0) == 2.5);
}

TEST_CASE("zero upstream gives zero gradients") {
  const ModelConfig cfg = tiny_config(3);
  Rng rng(14);
  const auto params = init_params<double>(cfg, 2);
  const auto fr = forward(params, random_input<double>(rng, 16, 4));
  auto grads = params.zeros_like();
  backward(params, fr, fr.outputs.zeros_like(), grads);
  for (const auto& t : std::as_const(grads).tensors()) CHECK(t.value->isZero(0.0));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(15);
  const std::vector<Segment> segments = {{ActivityClass::kTimeOut, 1.3, 9.6}, {ActivityClass::kStop, 10.4, 14.7}};
  for (PyramidMode mode : {PyramidMode::kMaxPlusAvg, PyramidMode::kAvgOnly, PyramidMode::kMaxOnly}) {
    for (Eigen::Index t : {16, 13}) {
      ModelConfig cfg = tiny_config(3);
      cfg.pyramid_mode = mode;
      const auto params = randomized_params(cfg, 21);
      const auto report = check_gradients(params, random_input<double>(rng, t, 4), segments, 1.0);
      INFO(to_string(mode), " T=", t, " worst ", report.worst_tensor, "[", report.worst_index,
           "] analytic=", report.analytic, " numeric=", report.numeric);
      CHECK(report.max_rel_error < 1e-4);
      CHECK(report.checked == params.parameter_count());
    }
  }
}

TEST_CASE("gradient failures name the tensor") {
  GradCheckReport report;
  report.max_rel_error = 0.5;
  report.worst_tensor = "reg_head.proj.bias";
  report.worst_index = 1;
  CHECK_THROWS_WITH_AS(require_gradients(report, 1e-4), doctest::Contains("reg_head.proj.bias"), GradientError);
  report.max_rel_error = 1e-6;
  CHECK_NOTHROW(require_gradients(report, 1e-4));
}

TEST_CASE("input width is checked") {
  const ModelConfig cfg = tiny_config(2);
  const auto params = init_params<float>(cfg, 1);
  const Matrix<float> wide = Matrix<float>::Zero(8, 5);
  CHECK_THROWS_AS(forward(params, wide), ShapeError);

  FeatureSequence seq;
  seq.video_id = "x";
  seq.features = FeatureMatrix::Zero(8, 6);
  seq.global_dim = 4;
  seq.feature_fps = 1.0f;
  seq.duration_s = 8.0f;
  ModelConfig g = cfg;
  g.feature_mode = FeatureMode::kGlobalOnly;
  CHECK(model_input<float>(seq, g).cols() == 4);
  ModelConfig local = cfg;
  local.feature_mode = FeatureMode::kLocalOnly;
  CHECK_THROWS_AS(model_input<float>(seq, local), ShapeError);
  local.input_dim = 2;
  CHECK(model_input<float>(seq, local).cols() == 2);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  ModelConfig cfg = tiny_config(3);
  cfg.pyramid_mode = PyramidMode::kMaxOnly;
  cfg.feature_mode = FeatureMode::kGlobalOnly;
  const auto params = init_params<float>(cfg, 9);
  const auto bytes = encode_checkpoint(params);
  const auto back = decode_checkpoint(bytes);
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.config.pyramid_mode == PyramidMode::kMaxOnly);
  CHECK(back.config.feature_mode == FeatureMode::kGlobalOnly);
  CHECK(checkpoint_hash(back) == checkpoint_hash(params));

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_checkpoint(truncated), Error);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
}

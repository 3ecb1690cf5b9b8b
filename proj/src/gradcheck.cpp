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
#include "gadet/gradcheck.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "gadet/errors.hpp"
#include "gadet/random.hpp"

namespace gadet {
namespace {

double loss_at(const ModelParams<double>& params, const Matrix<double>& input, MomentTargets& targets,
               const LossConfig& loss) {
  const auto fr = forward(params, input);
  return total_loss(fr.outputs, targets, loss).total;
}

}  // namespace

ModelParams<double> randomized_params(const ModelConfig& cfg, std::uint64_t seed, double scale) {
  ModelParams<double> params = init_params<double>(cfg, seed);
  Rng rng(derive_seed(seed, 0x6AD));
  for (auto& t : params.tensors()) {
    for (Eigen::Index i = 0; i < t.value->size(); ++i) t.value->data()[i] += scale * rng.normal();
  }
  for (Eigen::Index i = 0; i < params.cls_head.proj.bias.size(); ++i) params.cls_head.proj.bias.data()[i] = rng.normal();
  return params;
}

double gradient_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (std::abs(analytic) + 1e-8);
}

GradCheckReport check_gradients(const ModelParams<double>& params, const Matrix<double>& input,
                                std::span<const Segment> segments, double feature_fps,
                                const AssignmentConfig& assignment, const LossConfig& loss, double step) {
  const auto fr = forward(params, input);
  std::vector<LevelGeometry> geometry;
  for (const auto& level : fr.pyramid.levels) geometry.push_back(level.geometry);
  MomentTargets targets = assign_targets(segments, geometry, feature_fps, assignment);

  HeadOutputs<double> upstream;
  total_loss(fr.outputs, targets, loss, &upstream);
  targets.sigma_frozen = true;
  ModelParams<double> grads = params.zeros_like();
  backward(params, fr, upstream, grads);

  GradCheckReport report;
  ModelParams<double> probe = params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = std::as_const(grads).tensors();
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    Matrix<double>& value = *probe_tensors[k].value;
    const Matrix<double>& grad = *grad_tensors[k].value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double original = value.data()[i];
      value.data()[i] = original + step;
      const double up = loss_at(probe, input, targets, loss);
      value.data()[i] = original - step;
      const double down = loss_at(probe, input, targets, loss);
      value.data()[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grad.data()[i];
      const double err = gradient_rel_error(analytic, numeric);
      ++report.checked;
      if (err > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = err;
        report.worst_tensor = probe_tensors[k].name;
        report.worst_index = i;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

void require_gradients(const GradCheckReport& report, double tolerance) {
  if (report.max_rel_error < tolerance) return;
  std::ostringstream msg;
  msg << "gradient mismatch in " << report.worst_tensor << "[" << report.worst_index << "]: analytic "
      << report.analytic << ", numeric " << report.numeric << ", relative error " << report.max_rel_error;
  throw GradientError(msg.str());
}

}  // namespace gadet

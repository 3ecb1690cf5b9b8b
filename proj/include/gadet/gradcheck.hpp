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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "gadet/assign.hpp"
#include "gadet/loss.hpp"
#include "gadet/network.hpp"

namespace gadet {

/// Worst disagreement between analytic and central-difference gradients.
struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Relative error |a - n| / (|a| + 1e-8).
double gradient_rel_error(double analytic, double numeric);

/// Compares backward() through total_loss against central differences for
/// every scalar parameter. The IoU weights are computed once at the
/// unperturbed point and held fixed, matching the stop-gradient.
/// init_params plus N(0, scale^2) noise on every scalar, with the
/// classification bias redrawn from N(0, 1). At the prior bias the focal
/// gradients are too small for central differences to resolve.
ModelParams<double> randomized_params(const ModelConfig& cfg, std::uint64_t seed, double scale = 0.2);

GradCheckReport check_gradients(const ModelParams<double>& params, const Matrix<double>& input,
                                std::span<const Segment> segments, double feature_fps,
                                const AssignmentConfig& assignment = {}, const LossConfig& loss = {},
                                double step = 1e-5);

/// Throws GradientError naming the offending tensor when the report exceeds tolerance.
void require_gradients(const GradCheckReport& report, double tolerance);

}  // namespace gadet

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

#include "gadet/assign.hpp"
#include "gadet/network.hpp"
#include "gadet/types.hpp"

namespace gadet {

inline constexpr double kProbClamp = 1e-7;

/// Binary focal loss on a probability clamped to [kProbClamp, 1 - kProbClamp].
double focal_loss(double p, int y, double gamma);

/// d focal / d logit where p = sigmoid(logit). Zero where the clamp is active.
double focal_loss_grad_logit(double logit, int y, double gamma);

/// 1 - IoU + rho^2 / c^2 for 1D intervals. A degenerate prediction
/// (end <= start) is collapsed to the point at its midpoint.
double diou_loss(Interval pred, Interval target);

/// Gradient of diou_loss with respect to (pred.start, pred.end).
std::pair<double, double> diou_loss_grad(Interval pred, Interval target);

struct LossConfig {
  double focal_gamma = 2.0;
};

struct LossBreakdown {
  double total = 0.0;
  double cls_pos = 0.0;  // (1/N_pos) sum over positives of sigma_IoU * L_cls
  double cls_neg = 0.0;  // (1/N_neg) sum over negatives of L_cls
  double reg = 0.0;      // (1/N_pos) sum over positives of L_reg
  int num_positive = 0;
  int num_negative = 0;
};

/// Detection objective of one video:
///
///   L = (1/N_pos) sum_pos (sigma_IoU * L_cls + L_reg) + (1/N_neg) sum_neg L_cls
///
/// L_cls sums a sigmoid focal loss over classes; L_reg is the DIoU of the
/// predicted and target intervals; sigma_IoU is the IoU of the same pair and
/// is treated as a constant. Unless `targets.sigma_frozen`, sigma_IoU is
/// recomputed from `outputs` and stored back into `targets`.
///
/// When `grad` is non-null it receives `grad_scale * dL/d(outputs)`.
template <typename S>
LossBreakdown total_loss(const HeadOutputs<S>& outputs, MomentTargets& targets, const LossConfig& cfg,
                         HeadOutputs<S>* grad = nullptr, double grad_scale = 1.0);

}  // namespace gadet

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
#include "gadet/loss.hpp"

#include <algorithm>
#include <cmath>

#include "gadet/errors.hpp"
#include "gadet/metrics.hpp"

namespace gadet {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Interval collapse_degenerate(Interval a) {
  if (a.end > a.start) return a;
  const double mid = a.center();
  return {mid, mid};
}

}  // namespace

double focal_loss(double p, int y, double gamma) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  if (y == 1) return -std::pow(1.0 - p, gamma) * std::log(p);
  return -std::pow(p, gamma) * std::log1p(-p);
}

double focal_loss_grad_logit(double logit, int y, double gamma) {
  const double p = sigmoid(logit);
  if (p < kProbClamp || p > 1.0 - kProbClamp) return 0.0;
  const double q = 1.0 - p;
  double dl_dp;
  if (y == 1) {
    const double lead = gamma == 0.0 ? 0.0 : gamma * std::pow(q, gamma - 1.0) * std::log(p);
    dl_dp = lead - std::pow(q, gamma) / p;
  } else {
    const double lead = gamma == 0.0 ? 0.0 : -gamma * std::pow(p, gamma - 1.0) * std::log1p(-p);
    dl_dp = lead + std::pow(p, gamma) / q;
  }
  return dl_dp * p * q;
}

double diou_loss(Interval pred, Interval target) {
  pred = collapse_degenerate(pred);
  const double inter = std::max(0.0, std::min(pred.end, target.end) - std::max(pred.start, target.start));
  const double uni = pred.length() + target.length() - inter;
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  const double c = std::max(pred.end, target.end) - std::min(pred.start, target.start);
  const double rho = pred.center() - target.center();
  return 1.0 - iou + (c > 0.0 ? rho * rho / (c * c) : 0.0);
}

std::pair<double, double> diou_loss_grad(Interval pred, Interval target) {
  if (!(pred.end > pred.start)) return {0.0, 0.0};
  const double a1 = pred.start;
  const double a2 = pred.end;
  const double b1 = target.start;
  const double b2 = target.end;
  const double inter = std::max(0.0, std::min(a2, b2) - std::max(a1, b1));
  const double uni = (a2 - a1) + (b2 - b1) - inter;
  const double c = std::max(a2, b2) - std::min(a1, b1);
  const double rho = 0.5 * (a1 + a2) - 0.5 * (b1 + b2);

  const double dinter1 = (inter > 0.0 && a1 > b1) ? -1.0 : 0.0;
  const double dinter2 = (inter > 0.0 && a2 < b2) ? 1.0 : 0.0;
  const double duni1 = -1.0 - dinter1;
  const double duni2 = 1.0 - dinter2;
  const double diou1 = (dinter1 * uni - inter * duni1) / (uni * uni);
  const double diou2 = (dinter2 * uni - inter * duni2) / (uni * uni);
  const double dc1 = a1 < b1 ? -1.0 : 0.0;
  const double dc2 = a2 > b2 ? 1.0 : 0.0;
  const double c2 = c * c;
  const double dcenter1 = rho / c2 - 2.0 * rho * rho * dc1 / (c2 * c);
  const double dcenter2 = rho / c2 - 2.0 * rho * rho * dc2 / (c2 * c);
  return {-diou1 + dcenter1, -diou2 + dcenter2};
}

template <typename S>
LossBreakdown total_loss(const HeadOutputs<S>& outputs, MomentTargets& targets, const LossConfig& cfg,
                         HeadOutputs<S>* grad, double grad_scale) {
  if (outputs.levels.size() != targets.levels.size()) throw ShapeError("head outputs and targets differ in levels");
  LossBreakdown out;
  out.num_positive = targets.num_positive;
  out.num_negative = targets.num_negative;
  const double inv_pos = targets.num_positive > 0 ? 1.0 / targets.num_positive : 0.0;
  const double inv_neg = targets.num_negative > 0 ? 1.0 / targets.num_negative : 0.0;
  const double gamma = cfg.focal_gamma;
  if (grad != nullptr) *grad = outputs.zeros_like();

  double cls_pos = 0.0;
  double cls_neg = 0.0;
  double reg = 0.0;
  for (std::size_t l = 0; l < outputs.levels.size(); ++l) {
    const auto& ol = outputs.levels[l];
    auto& tl = targets.levels[l];
    const auto n = static_cast<Eigen::Index>(tl.label.size());
    if (ol.logits.rows() != n || ol.offsets.rows() != n) {
      throw ShapeError("head outputs and targets differ in length at level " + std::to_string(l + 1));
    }
    const auto classes = ol.logits.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = tl.label[static_cast<std::size_t>(i)];
      if (label == kNegative) {
        for (Eigen::Index c = 0; c < classes; ++c) {
          const double z = static_cast<double>(ol.logits(i, c));
          cls_neg += focal_loss(sigmoid(z), 0, gamma);
          if (grad != nullptr) {
            grad->levels[l].logits(i, c) = static_cast<S>(grad_scale * inv_neg * focal_loss_grad_logit(z, 0, gamma));
          }
        }
        continue;
      }
      const Interval pred{-static_cast<double>(ol.offsets(i, 0)), static_cast<double>(ol.offsets(i, 1))};
      const Interval target{-tl.offsets(i, 0), tl.offsets(i, 1)};
      double& sigma = tl.sigma_iou[static_cast<std::size_t>(i)];
      if (!targets.sigma_frozen) sigma = tiou(pred, target);

      double lcls = 0.0;
      for (Eigen::Index c = 0; c < classes; ++c) {
        const int y = c == label ? 1 : 0;
        const double z = static_cast<double>(ol.logits(i, c));
        lcls += focal_loss(sigmoid(z), y, gamma);
        if (grad != nullptr) {
          grad->levels[l].logits(i, c) =
              static_cast<S>(grad_scale * inv_pos * sigma * focal_loss_grad_logit(z, y, gamma));
        }
      }
      cls_pos += sigma * lcls;
      reg += diou_loss(pred, target);
      if (grad != nullptr) {
        const auto [d_start, d_end] = diou_loss_grad(pred, target);
        // pred.start = -d_s
        grad->levels[l].offsets(i, 0) = static_cast<S>(-grad_scale * inv_pos * d_start);
        grad->levels[l].offsets(i, 1) = static_cast<S>(grad_scale * inv_pos * d_end);
      }
    }
  }
  out.cls_pos = cls_pos * inv_pos;
  out.reg = reg * inv_pos;
  out.cls_neg = cls_neg * inv_neg;
  out.total = out.cls_pos + out.reg + out.cls_neg;
  return out;
}

template LossBreakdown total_loss<float>(const HeadOutputs<float>&, MomentTargets&, const LossConfig&,
                                         HeadOutputs<float>*, double);
template LossBreakdown total_loss<double>(const HeadOutputs<double>&, MomentTargets&, const LossConfig&,
                                          HeadOutputs<double>*, double);

}  // namespace gadet

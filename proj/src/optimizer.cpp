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
#include "gadet/optimizer.hpp"

#include <cmath>
#include <numbers>

namespace gadet {

AdamW::AdamW(const ModelParams<float>& params, AdamWConfig cfg)
    : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

void AdamW::step(ModelParams<float>& params, const ModelParams<float>& grads, double lr) {
  ++steps_;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool decay = p[k].name.ends_with(".weight");
    float* w = p[k].value->data();
    const float* gk = g[k].value->data();
    float* mk = m[k].value->data();
    float* vk = v[k].value->data();
    for (Eigen::Index i = 0; i < p[k].value->size(); ++i) {
      const double grad = gk[i];
      const double mi = cfg_.beta1 * mk[i] + (1.0 - cfg_.beta1) * grad;
      const double vi = cfg_.beta2 * vk[i] + (1.0 - cfg_.beta2) * grad * grad;
      mk[i] = static_cast<float>(mi);
      vk[i] = static_cast<float>(vi);
      double wi = w[i];
      if (decay) wi -= lr * cfg_.weight_decay * wi;
      wi -= lr * (mi / bias1) / (std::sqrt(vi / bias2) + cfg_.eps);
      w[i] = static_cast<float>(wi);
    }
  }
}

double global_grad_norm(const ModelParams<float>& grads) {
  double sq = 0.0;
  for (const auto& t : grads.tensors()) {
    for (Eigen::Index i = 0; i < t.value->size(); ++i) {
      const double x = t.value->data()[i];
      sq += x * x;
    }
  }
  return std::sqrt(sq);
}

double clip_grad_norm(ModelParams<float>& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const auto scale = static_cast<float>(max_norm / (norm + 1e-6));
    for (auto& t : grads.tensors()) *t.value *= scale;
  }
  return norm;
}

double learning_rate_at(long step, long total_steps, long warmup_steps, double base_lr) {
  if (warmup_steps > 0 && step < warmup_steps) {
    return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  const long decay_steps = total_steps - warmup_steps;
  if (decay_steps <= 0) return base_lr;
  const double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(decay_steps);
  return 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * std::min(progress, 1.0)));
}

}  // namespace gadet

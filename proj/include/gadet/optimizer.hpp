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

#include "gadet/network.hpp"

namespace gadet {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;  // decoupled; applied to conv weights only
};

/// Adam with decoupled weight decay:
///   w <- w - lr * wd * w;  w <- w - lr * m_hat / (sqrt(v_hat) + eps)
class AdamW {
 public:
  AdamW(const ModelParams<float>& params, AdamWConfig cfg);

  void step(ModelParams<float>& params, const ModelParams<float>& grads, double lr);
  long steps() const { return steps_; }

 private:
  AdamWConfig cfg_;
  ModelParams<float> m_;
  ModelParams<float> v_;
  long steps_ = 0;
};

double global_grad_norm(const ModelParams<float>& grads);

/// Rescales `grads` so the global L2 norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_grad_norm(ModelParams<float>& grads, double max_norm);

/// Linear warmup over `warmup_steps`, then cosine decay to zero at
/// `total_steps`.
double learning_rate_at(long step, long total_steps, long warmup_steps, double base_lr);

}  // namespace gadet

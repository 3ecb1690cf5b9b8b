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

// Anchor-free temporal detector over 1D feature sequences.
//
//   input (T x D) -> [conv k -> layer norm -> ReLU] x 2          = Z^1
//   Z_m^l = maxpool2(Z_m^{l-1}),  Z_a^l = avgpool2(Z_a^{l-1})     l = 2..L
//   Z^l   = Z_m^l + Z_a^l                                         (fusion)
//   per level: classification stack -> C logits,
//              regression stack     -> softplus -> (d_s, d_e) in stride units
//
// All activations are time-major (rows = time, columns = channels). The input
// is zero-padded on the right to a multiple of 2^(L-1); padded positions are
// masked everywhere so that outputs at valid moments do not depend on the
// amount of padding.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gadet/types.hpp"

namespace gadet {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PyramidMode { kMaxOnly, kAvgOnly, kMaxPlusAvg };
enum class FeatureMode { kFull, kGlobalOnly, kLocalOnly };

std::string_view to_string(PyramidMode mode);
std::string_view to_string(FeatureMode mode);
PyramidMode parse_pyramid_mode(std::string_view text);
FeatureMode parse_feature_mode(std::string_view text);

inline constexpr int kBackboneConvs = 2;

struct ModelConfig {
  int input_dim = 64;
  int backbone_width = 256;
  int kernel_size = 3;
  int pyramid_levels = 7;
  int head_width = 256;
  int head_convs = 2;
  int num_classes = kNumActivityClasses;
  PyramidMode pyramid_mode = PyramidMode::kMaxPlusAvg;
  /// Which feature columns feed the model; input_dim must match the slice.
  FeatureMode feature_mode = FeatureMode::kFull;
  /// Initial foreground probability encoded in the classification bias.
  double prior_prob = 0.01;

  /// Throws ConfigError.
  void validate() const;
  Eigen::Index top_stride() const { return Eigen::Index{1} << (pyramid_levels - 1); }
};

template <typename S>
struct ConvLayer {
  Matrix<S> weight;  // (kernel * in) x out, tap-major
  Matrix<S> bias;    // 1 x out
};

template <typename S>
struct NormLayer {
  Matrix<S> gain;    // 1 x channels
  Matrix<S> offset;  // 1 x channels
};

template <typename S>
struct ConvBlock {
  ConvLayer<S> conv;
  NormLayer<S> norm;
};

template <typename S>
struct Head {
  std::vector<ConvBlock<S>> blocks;
  ConvLayer<S> proj;
};

template <typename S>
struct NamedTensor {
  std::string name;
  Matrix<S>* value;
};

template <typename S>
struct ConstNamedTensor {
  std::string name;
  const Matrix<S>* value;
};

/// Every trainable tensor. Gradients use the same type: a zeroed copy made
/// with zeros_like() is the gradient slot for each tensor.
template <typename S>
struct ModelParams {
  ModelConfig config;
  std::vector<ConvBlock<S>> backbone;
  Head<S> cls_head;  // shared by all pyramid levels
  Head<S> reg_head;  // shared by all pyramid levels

  /// Stable order used by checkpoints, the optimizer and gradient checks.
  std::vector<NamedTensor<S>> tensors();
  std::vector<ConstNamedTensor<S>> tensors() const;

  ModelParams zeros_like() const;
  void set_zero();
  std::size_t parameter_count() const;

  template <typename T>
  ModelParams<T> cast() const;
};

/// Zero-filled parameters with the shapes implied by `config`.
template <typename S>
ModelParams<S> make_params(const ModelConfig& config);

/// Fan-in uniform conv weights, zero biases, identity layer norms and the
/// prior-probability bias on the classification projection.
template <typename S>
ModelParams<S> init_params(const ModelConfig& config, std::uint64_t seed);

struct LevelGeometry {
  int stride = 1;             // in feature-grid steps
  Eigen::Index length = 0;    // padded length at this level
  Eigen::Index valid_length = 0;
};

/// Padded length is T rounded up to a multiple of 2^(L-1); each level halves
/// it and valid lengths follow ceil(v / 2).
std::vector<LevelGeometry> pyramid_geometry(Eigen::Index valid_length, int levels);

template <typename S>
struct PyramidLevel {
  LevelGeometry geometry;
  Matrix<S> fused;       // Z^l
  Matrix<S> max_branch;  // Z_m^l
  Matrix<S> avg_branch;  // Z_a^l
  std::vector<std::uint8_t> argmax;  // max-pool child (0/1) per element, empty on level 1
};

template <typename S>
struct PyramidState {
  std::vector<PyramidLevel<S>> levels;
};

/// Head outputs at valid moments only.
template <typename S>
struct HeadLevel {
  int stride = 1;
  Matrix<S> logits;   // valid_length x C
  Matrix<S> offsets;  // valid_length x 2, (d_s, d_e) >= 0 in stride units
};

template <typename S>
struct HeadOutputs {
  std::vector<HeadLevel<S>> levels;

  /// Same shapes, all zeros; used for upstream gradients.
  HeadOutputs zeros_like() const;
};

template <typename S>
struct ConvBlockCache {
  Matrix<S> columns;     // im2col of the block input
  Matrix<S> normalized;  // layer-norm output before gain/offset
  std::vector<S> inv_std;
  Matrix<S> output;      // after ReLU and masking
};

template <typename S>
struct HeadCache {
  std::vector<ConvBlockCache<S>> blocks;
  Matrix<S> proj_columns;
  Matrix<S> raw;  // projection output, padded length
};

template <typename S>
struct ForwardCache {
  std::vector<ConvBlockCache<S>> backbone;
  std::vector<HeadCache<S>> cls;  // per level
  std::vector<HeadCache<S>> reg;  // per level
};

template <typename S>
struct ForwardResult {
  PyramidState<S> pyramid;
  HeadOutputs<S> outputs;
  ForwardCache<S> cache;
};

/// Selects the configured feature columns and converts to S. Throws
/// ShapeError when the slice width differs from config.input_dim.
/// One masked kernel-2 / stride-2 pooling step for both branches. `level`
/// must carry its geometry; padded children are skipped.
template <typename S>
void pool_level(const PyramidLevel<S>& prev, PyramidLevel<S>& level);

/// Routes branch gradients of `level` back to its children in `prev`.
template <typename S>
void pool_level_backward(const PyramidLevel<S>& prev, const PyramidLevel<S>& level, const Matrix<S>& dmax,
                         const Matrix<S>& davg, Matrix<S>& dmax_prev, Matrix<S>& davg_prev);

template <typename S>
Matrix<S> model_input(const FeatureSequence& seq, const ModelConfig& config);

/// Runs the model on the first `valid_length` rows of `input`; remaining
/// rows are treated as padding. `valid_length < 0` means all rows.
template <typename S>
ForwardResult<S> forward(const ModelParams<S>& params, const Matrix<S>& input,
                         Eigen::Index valid_length = -1);

template <typename S>
ForwardResult<S> forward(const ModelParams<S>& params, const FeatureSequence& seq);

/// Accumulates d(loss)/d(param) into `grads` given d(loss)/d(head outputs).
template <typename S>
void backward(const ModelParams<S>& params, const ForwardResult<S>& forward_result,
              const HeadOutputs<S>& upstream, ModelParams<S>& grads);

}  // namespace gadet

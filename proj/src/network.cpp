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
#include "gadet/network.hpp"

#include <algorithm>
#include <cmath>

#include "gadet/errors.hpp"
#include "gadet/random.hpp"

namespace gadet {
namespace {

using Eigen::Index;

// Convolutions run as fixed-height GEMM tiles aligned to t = 0. A row's
// result then depends only on its own im2col row, never on how many padded
// rows follow it, which is what makes padding invariance bit-exact.
constexpr Index kTile = 64;
constexpr double kNormEps = 1e-5;

Index round_up(Index n, Index m) { return (n + m - 1) / m * m; }

template <typename S>
void im2col(const Matrix<S>& x, int kernel, Matrix<S>& columns) {
  const Index len = x.rows();
  const Index in = x.cols();
  const int half = kernel / 2;
  columns.setZero(round_up(len, kTile), kernel * in);
  for (Index t = 0; t < len; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const Index src = t + j - half;
      if (src < 0 || src >= len) continue;
      columns.row(t).segment(j * in, in) = x.row(src);
    }
  }
}

template <typename S>
Matrix<S> conv_forward(const ConvLayer<S>& layer, const Matrix<S>& x, int kernel, Matrix<S>& columns) {
  im2col(x, kernel, columns);
  Matrix<S> y(columns.rows(), layer.weight.cols());
  for (Index r = 0; r < columns.rows(); r += kTile) {
    y.middleRows(r, kTile).noalias() = columns.middleRows(r, kTile) * layer.weight;
  }
  Matrix<S> out = y.topRows(x.rows());
  out.rowwise() += layer.bias.row(0);
  return out;
}

template <typename S>
void conv_backward(const ConvLayer<S>& layer, const Matrix<S>& columns, const Matrix<S>& dy, int kernel,
                   ConvLayer<S>& grad, Matrix<S>* dx) {
  const Index len = dy.rows();
  grad.weight.noalias() += columns.topRows(len).transpose() * dy;
  grad.bias.noalias() += dy.colwise().sum();
  if (dx == nullptr) return;
  const Index in = layer.weight.rows() / kernel;
  const int half = kernel / 2;
  Matrix<S> dcols = dy * layer.weight.transpose();
  dx->setZero(len, in);
  for (Index t = 0; t < len; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const Index src = t + j - half;
      if (src < 0 || src >= len) continue;
      dx->row(src) += dcols.row(t).segment(j * in, in);
    }
  }
}

// conv -> layer norm -> ReLU -> zero rows at and beyond `valid`.
template <typename S>
Matrix<S> block_forward(const ConvBlock<S>& block, const Matrix<S>& x, Index valid, int kernel,
                        ConvBlockCache<S>& cache) {
  Matrix<S> pre = conv_forward(block.conv, x, kernel, cache.columns);
  const Index len = pre.rows();
  const Index width = pre.cols();
  cache.normalized.resize(len, width);
  cache.inv_std.assign(static_cast<std::size_t>(len), S(0));
  cache.output.setZero(len, width);
  for (Index t = 0; t < valid; ++t) {
    S mean = 0;
    for (Index c = 0; c < width; ++c) mean += pre(t, c);
    mean /= static_cast<S>(width);
    S var = 0;
    for (Index c = 0; c < width; ++c) {
      const S d = pre(t, c) - mean;
      var += d * d;
    }
    var /= static_cast<S>(width);
    const S inv_std = S(1) / std::sqrt(var + static_cast<S>(kNormEps));
    cache.inv_std[static_cast<std::size_t>(t)] = inv_std;
    for (Index c = 0; c < width; ++c) {
      const S xhat = (pre(t, c) - mean) * inv_std;
      cache.normalized(t, c) = xhat;
      const S y = block.norm.gain(0, c) * xhat + block.norm.offset(0, c);
      cache.output(t, c) = y > S(0) ? y : S(0);
    }
  }
  cache.normalized.bottomRows(len - valid).setZero();
  return cache.output;
}

template <typename S>
void block_backward(const ConvBlock<S>& block, const ConvBlockCache<S>& cache, const Matrix<S>& dout,
                    Index valid, int kernel, ConvBlock<S>& grad, Matrix<S>* dx) {
  const Index len = dout.rows();
  const Index width = dout.cols();
  Matrix<S> dpre = Matrix<S>::Zero(len, width);
  std::vector<S> dxhat(static_cast<std::size_t>(width));
  for (Index t = 0; t < valid; ++t) {
    S mean_d = 0;
    S mean_dx = 0;
    for (Index c = 0; c < width; ++c) {
      const S g = cache.output(t, c) > S(0) ? dout(t, c) : S(0);
      const S xhat = cache.normalized(t, c);
      grad.norm.gain(0, c) += g * xhat;
      grad.norm.offset(0, c) += g;
      const S d = g * block.norm.gain(0, c);
      dxhat[static_cast<std::size_t>(c)] = d;
      mean_d += d;
      mean_dx += d * xhat;
    }
    mean_d /= static_cast<S>(width);
    mean_dx /= static_cast<S>(width);
    const S inv_std = cache.inv_std[static_cast<std::size_t>(t)];
    for (Index c = 0; c < width; ++c) {
      dpre(t, c) = inv_std * (dxhat[static_cast<std::size_t>(c)] - mean_d - cache.normalized(t, c) * mean_dx);
    }
  }
  conv_backward(block.conv, cache.columns, dpre, kernel, grad.conv, dx);
}

template <typename S>
S softplus(S x) {
  return x > S(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename S>
S sigmoid(S x) {
  if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
  const S e = std::exp(x);
  return e / (S(1) + e);
}

template <typename S>
Matrix<S> head_forward(const Head<S>& head, const Matrix<S>& x, Index valid, int kernel, HeadCache<S>& cache) {
  cache.blocks.resize(head.blocks.size());
  Matrix<S> h = x;
  for (std::size_t i = 0; i < head.blocks.size(); ++i) {
    h = block_forward(head.blocks[i], h, valid, kernel, cache.blocks[i]);
  }
  cache.raw = conv_forward(head.proj, h, kernel, cache.proj_columns);
  return cache.raw;
}

template <typename S>
void head_backward(const Head<S>& head, const HeadCache<S>& cache, const Matrix<S>& draw, Index valid,
                   int kernel, Head<S>& grad, Matrix<S>& dx) {
  Matrix<S> d;
  conv_backward(head.proj, cache.proj_columns, draw, kernel, grad.proj, &d);
  for (std::size_t i = head.blocks.size(); i-- > 0;) {
    Matrix<S> dprev;
    block_backward(head.blocks[i], cache.blocks[i], d, valid, kernel, grad.blocks[i], &dprev);
    d = std::move(dprev);
  }
  dx += d;
}

bool uses_max(PyramidMode mode) { return mode != PyramidMode::kAvgOnly; }
bool uses_avg(PyramidMode mode) { return mode != PyramidMode::kMaxOnly; }

template <typename S>
void init_conv(ConvLayer<S>& layer, int kernel, int in, int out) {
  layer.weight = Matrix<S>::Zero(kernel * in, out);
  layer.bias = Matrix<S>::Zero(1, out);
}

template <typename S>
void init_block(ConvBlock<S>& block, int kernel, int in, int out) {
  init_conv(block.conv, kernel, in, out);
  block.norm.gain = Matrix<S>::Ones(1, out);
  block.norm.offset = Matrix<S>::Zero(1, out);
}

template <typename S, typename Params, typename Out>
void collect(Params& p, Out& out) {
  const auto add_block = [&](const std::string& prefix, auto& block) {
    out.push_back({prefix + ".conv.weight", &block.conv.weight});
    out.push_back({prefix + ".conv.bias", &block.conv.bias});
    out.push_back({prefix + ".norm.gain", &block.norm.gain});
    out.push_back({prefix + ".norm.offset", &block.norm.offset});
  };
  for (std::size_t i = 0; i < p.backbone.size(); ++i) add_block("backbone." + std::to_string(i), p.backbone[i]);
  const auto add_head = [&](const std::string& prefix, auto& head) {
    for (std::size_t i = 0; i < head.blocks.size(); ++i) add_block(prefix + "." + std::to_string(i), head.blocks[i]);
    out.push_back({prefix + ".proj.weight", &head.proj.weight});
    out.push_back({prefix + ".proj.bias", &head.proj.bias});
  };
  add_head("cls_head", p.cls_head);
  add_head("reg_head", p.reg_head);
}

}  // namespace

std::string_view to_string(PyramidMode mode) {
  switch (mode) {
    case PyramidMode::kMaxOnly:
      return "max_only";
    case PyramidMode::kAvgOnly:
      return "avg_only";
    case PyramidMode::kMaxPlusAvg:
      return "max_plus_avg";
  }
  return "unknown";
}

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kFull:
      return "full";
    case FeatureMode::kGlobalOnly:
      return "global_only";
    case FeatureMode::kLocalOnly:
      return "local_only";
  }
  return "unknown";
}

PyramidMode parse_pyramid_mode(std::string_view text) {
  if (text == "max_only") return PyramidMode::kMaxOnly;
  if (text == "avg_only") return PyramidMode::kAvgOnly;
  if (text == "max_plus_avg") return PyramidMode::kMaxPlusAvg;
  throw ConfigError("unknown pyramid mode '" + std::string(text) + "'");
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "full") return FeatureMode::kFull;
  if (text == "global_only") return FeatureMode::kGlobalOnly;
  if (text == "local_only") return FeatureMode::kLocalOnly;
  throw ConfigError("unknown feature mode '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (input_dim < 1 || backbone_width < 1 || head_width < 1 || num_classes < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("kernel_size must be odd");
  if (pyramid_levels < 1 || pyramid_levels > 30) throw ConfigError("pyramid_levels must lie in [1, 30]");
  if (head_convs < 0) throw ConfigError("head_convs must be non-negative");
  if (!(prior_prob > 0.0 && prior_prob < 1.0)) throw ConfigError("prior_prob must lie in (0, 1)");
}

template <typename S>
std::vector<NamedTensor<S>> ModelParams<S>::tensors() {
  std::vector<NamedTensor<S>> out;
  collect<S>(*this, out);
  return out;
}

template <typename S>
std::vector<ConstNamedTensor<S>> ModelParams<S>::tensors() const {
  std::vector<ConstNamedTensor<S>> out;
  collect<S>(*this, out);
  return out;
}

template <typename S>
ModelParams<S> ModelParams<S>::zeros_like() const {
  ModelParams<S> out = *this;
  out.set_zero();
  return out;
}

template <typename S>
void ModelParams<S>::set_zero() {
  for (auto& t : tensors()) t.value->setZero();
}

template <typename S>
std::size_t ModelParams<S>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.value->size());
  return n;
}

template <typename S>
template <typename T>
ModelParams<T> ModelParams<S>::cast() const {
  ModelParams<T> out = make_params<T>(config);
  auto dst = out.tensors();
  const auto src = tensors();
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i].value = src[i].value->template cast<T>();
  return out;
}

template <typename S>
ModelParams<S> make_params(const ModelConfig& config) {
  config.validate();
  ModelParams<S> p;
  p.config = config;
  const int k = config.kernel_size;
  p.backbone.resize(kBackboneConvs);
  init_block(p.backbone[0], k, config.input_dim, config.backbone_width);
  for (int i = 1; i < kBackboneConvs; ++i) init_block(p.backbone[i], k, config.backbone_width, config.backbone_width);
  for (Head<S>* head : {&p.cls_head, &p.reg_head}) {
    head->blocks.resize(static_cast<std::size_t>(config.head_convs));
    int in = config.backbone_width;
    for (auto& b : head->blocks) {
      init_block(b, k, in, config.head_width);
      in = config.head_width;
    }
  }
  const int head_in = config.head_convs > 0 ? config.head_width : config.backbone_width;
  init_conv(p.cls_head.proj, k, head_in, config.num_classes);
  init_conv(p.reg_head.proj, k, head_in, 2);
  return p;
}

template <typename S>
ModelParams<S> init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams<S> p = make_params<S>(config);
  Rng rng(seed);
  for (auto& t : p.tensors()) {
    if (!t.name.ends_with(".weight")) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.value->rows()));
    for (Index i = 0; i < t.value->size(); ++i) {
      t.value->data()[i] = static_cast<S>(rng.uniform(-bound, bound));
    }
  }
  const double prior = config.prior_prob;
  p.cls_head.proj.bias.setConstant(static_cast<S>(-std::log((1.0 - prior) / prior)));
  return p;
}

std::vector<LevelGeometry> pyramid_geometry(Index valid_length, int levels) {
  if (valid_length < 1) throw ShapeError("sequence must have at least one step");
  if (levels < 1) throw ShapeError("pyramid needs at least one level");
  const Index top = Index{1} << (levels - 1);
  std::vector<LevelGeometry> out(static_cast<std::size_t>(levels));
  Index length = round_up(valid_length, top);
  Index valid = valid_length;
  for (int l = 0; l < levels; ++l) {
    out[static_cast<std::size_t>(l)] = {1 << l, length, valid};
    length /= 2;
    valid = (valid + 1) / 2;
  }
  return out;
}

template <typename S>
HeadOutputs<S> HeadOutputs<S>::zeros_like() const {
  HeadOutputs<S> out;
  out.levels.reserve(levels.size());
  for (const auto& l : levels) {
    out.levels.push_back(
        {l.stride, Matrix<S>::Zero(l.logits.rows(), l.logits.cols()), Matrix<S>::Zero(l.offsets.rows(), 2)});
  }
  return out;
}

template <typename S>
Matrix<S> model_input(const FeatureSequence& seq, const ModelConfig& config) {
  Index first = 0;
  Index width = seq.dims();
  switch (config.feature_mode) {
    case FeatureMode::kFull:
      break;
    case FeatureMode::kGlobalOnly:
      width = seq.global_dim;
      break;
    case FeatureMode::kLocalOnly:
      first = seq.global_dim;
      width = seq.dims() - seq.global_dim;
      break;
  }
  if (width != config.input_dim) {
    throw ShapeError("model expects " + std::to_string(config.input_dim) + " input features, '" + seq.video_id +
                     "' provides " + std::to_string(width) + " in " + std::string(to_string(config.feature_mode)) +
                     " mode");
  }
  return seq.features.middleCols(first, width).template cast<S>();
}

template <typename S>
void pool_level(const PyramidLevel<S>& prev, PyramidLevel<S>& level) {
  const Index len = level.geometry.length;
  const Index width = prev.max_branch.cols();
  const Index prev_valid = prev.geometry.valid_length;
  level.max_branch.setZero(len, width);
  level.avg_branch.setZero(len, width);
  level.argmax.assign(static_cast<std::size_t>(len * width), 0);
  for (Index t = 0; t < level.geometry.valid_length; ++t) {
    const Index a = 2 * t;
    const Index b = 2 * t + 1;
    const bool pair = b < prev_valid;
    for (Index c = 0; c < width; ++c) {
      const S ma = prev.max_branch(a, c);
      if (pair && prev.max_branch(b, c) > ma) {
        level.max_branch(t, c) = prev.max_branch(b, c);
        level.argmax[static_cast<std::size_t>(t * width + c)] = 1;
      } else {
        level.max_branch(t, c) = ma;
      }
      level.avg_branch(t, c) = pair ? S(0.5) * (prev.avg_branch(a, c) + prev.avg_branch(b, c)) : prev.avg_branch(a, c);
    }
  }
}

template <typename S>
void pool_level_backward(const PyramidLevel<S>& prev, const PyramidLevel<S>& level, const Matrix<S>& dmax,
                         const Matrix<S>& davg, Matrix<S>& dmax_prev, Matrix<S>& davg_prev) {
  const Index width = level.max_branch.cols();
  const Index prev_valid = prev.geometry.valid_length;
  dmax_prev.setZero(prev.geometry.length, width);
  davg_prev.setZero(prev.geometry.length, width);
  for (Index t = 0; t < level.geometry.valid_length; ++t) {
    const Index a = 2 * t;
    const Index b = 2 * t + 1;
    const bool pair = b < prev_valid;
    for (Index c = 0; c < width; ++c) {
      const Index child = level.argmax[static_cast<std::size_t>(t * width + c)] ? b : a;
      dmax_prev(child, c) += dmax(t, c);
      if (pair) {
        const S half = S(0.5) * davg(t, c);
        davg_prev(a, c) += half;
        davg_prev(b, c) += half;
      } else {
        davg_prev(a, c) += davg(t, c);
      }
    }
  }
}

template <typename S>
ForwardResult<S> forward(const ModelParams<S>& params, const Matrix<S>& input, Index valid_length) {
  const ModelConfig& cfg = params.config;
  if (input.cols() != cfg.input_dim) {
    throw ShapeError("input has " + std::to_string(input.cols()) + " features, model expects " +
                     std::to_string(cfg.input_dim));
  }
  if (valid_length < 0) valid_length = input.rows();
  if (valid_length > input.rows()) throw ShapeError("valid length exceeds input rows");
  const auto geometry = pyramid_geometry(valid_length, cfg.pyramid_levels);
  const int k = cfg.kernel_size;

  ForwardResult<S> result;
  auto& levels = result.pyramid.levels;
  levels.resize(geometry.size());

  Matrix<S> h = Matrix<S>::Zero(geometry[0].length, cfg.input_dim);
  h.topRows(valid_length) = input.topRows(valid_length);
  result.cache.backbone.resize(params.backbone.size());
  for (std::size_t i = 0; i < params.backbone.size(); ++i) {
    h = block_forward(params.backbone[i], h, valid_length, k, result.cache.backbone[i]);
  }

  const PyramidMode mode = cfg.pyramid_mode;
  for (std::size_t l = 0; l < geometry.size(); ++l) {
    auto& level = levels[l];
    level.geometry = geometry[l];
    if (l == 0) {
      level.max_branch = h;
      level.avg_branch = h;
    } else {
      pool_level(levels[l - 1], level);
    }
    switch (mode) {
      case PyramidMode::kMaxOnly:
        level.fused = level.max_branch;
        break;
      case PyramidMode::kAvgOnly:
        level.fused = level.avg_branch;
        break;
      case PyramidMode::kMaxPlusAvg:
        level.fused = level.max_branch + level.avg_branch;
        break;
    }
  }

  result.cache.cls.resize(levels.size());
  result.cache.reg.resize(levels.size());
  result.outputs.levels.resize(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& g = levels[l].geometry;
    auto& out = result.outputs.levels[l];
    out.stride = g.stride;
    const Matrix<S> logits = head_forward(params.cls_head, levels[l].fused, g.valid_length, k, result.cache.cls[l]);
    const Matrix<S> raw = head_forward(params.reg_head, levels[l].fused, g.valid_length, k, result.cache.reg[l]);
    out.logits = logits.topRows(g.valid_length);
    out.offsets = raw.topRows(g.valid_length).unaryExpr([](S x) { return softplus(x); });
  }
  return result;
}

template <typename S>
ForwardResult<S> forward(const ModelParams<S>& params, const FeatureSequence& seq) {
  return forward(params, model_input<S>(seq, params.config));
}

template <typename S>
void backward(const ModelParams<S>& params, const ForwardResult<S>& fr, const HeadOutputs<S>& upstream,
              ModelParams<S>& grads) {
  const ModelConfig& cfg = params.config;
  const int k = cfg.kernel_size;
  const auto& levels = fr.pyramid.levels;
  if (upstream.levels.size() != levels.size()) throw ShapeError("upstream gradient has wrong level count");

  std::vector<Matrix<S>> dfused(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& g = levels[l].geometry;
    const auto& up = upstream.levels[l];
    if (up.logits.rows() != g.valid_length || up.offsets.rows() != g.valid_length) {
      throw ShapeError("upstream gradient shape mismatch at level " + std::to_string(l + 1));
    }
    dfused[l].setZero(g.length, levels[l].fused.cols());

    Matrix<S> dlogits = Matrix<S>::Zero(g.length, cfg.num_classes);
    dlogits.topRows(g.valid_length) = up.logits;
    head_backward(params.cls_head, fr.cache.cls[l], dlogits, g.valid_length, k, grads.cls_head, dfused[l]);

    const Matrix<S>& raw = fr.cache.reg[l].raw;
    Matrix<S> draw = Matrix<S>::Zero(g.length, 2);
    for (Index t = 0; t < g.valid_length; ++t) {
      for (Index j = 0; j < 2; ++j) draw(t, j) = up.offsets(t, j) * sigmoid(raw(t, j));
    }
    head_backward(params.reg_head, fr.cache.reg[l], draw, g.valid_length, k, grads.reg_head, dfused[l]);
  }

  const PyramidMode mode = cfg.pyramid_mode;
  Matrix<S> dmax;
  Matrix<S> davg;
  for (std::size_t l = levels.size(); l-- > 0;) {
    const auto& level = levels[l];
    const Index len = level.geometry.length;
    const Index width = level.fused.cols();
    if (dmax.size() == 0) {
      dmax.setZero(len, width);
      davg.setZero(len, width);
    }
    if (uses_max(mode)) dmax += dfused[l];
    if (uses_avg(mode)) davg += dfused[l];
    if (l == 0) break;

    Matrix<S> dmax_prev;
    Matrix<S> davg_prev;
    pool_level_backward(levels[l - 1], level, dmax, davg, dmax_prev, davg_prev);
    dmax = std::move(dmax_prev);
    davg = std::move(davg_prev);
  }

  Matrix<S> d = dmax + davg;
  const Index valid = levels[0].geometry.valid_length;
  for (std::size_t i = params.backbone.size(); i-- > 0;) {
    Matrix<S> dprev;
    block_backward(params.backbone[i], fr.cache.backbone[i], d, valid, k, grads.backbone[i], i > 0 ? &dprev : nullptr);
    d = std::move(dprev);
  }
}

#define GADET_INSTANTIATE(S)                                                                              \
  template struct ModelParams<S>;                                                                         \
  template struct HeadOutputs<S>;                                                                         \
  template ModelParams<S> make_params<S>(const ModelConfig&);                                             \
  template ModelParams<S> init_params<S>(const ModelConfig&, std::uint64_t);                              \
  template Matrix<S> model_input<S>(const FeatureSequence&, const ModelConfig&);                          \
  template ForwardResult<S> forward<S>(const ModelParams<S>&, const Matrix<S>&, Index);                   \
  template ForwardResult<S> forward<S>(const ModelParams<S>&, const FeatureSequence&);                    \
  template void backward<S>(const ModelParams<S>&, const ForwardResult<S>&, const HeadOutputs<S>&,        \
                            ModelParams<S>&);                                                             \
  template void pool_level<S>(const PyramidLevel<S>&, PyramidLevel<S>&);                                  \
  template void pool_level_backward<S>(const PyramidLevel<S>&, const PyramidLevel<S>&, const Matrix<S>&,  \
                                       const Matrix<S>&, Matrix<S>&, Matrix<S>&);

GADET_INSTANTIATE(float)
GADET_INSTANTIATE(double)
#undef GADET_INSTANTIATE

template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;

}  // namespace gadet

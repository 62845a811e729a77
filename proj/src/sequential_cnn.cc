/* Copyright 2026 The ScoreCAM Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "scorecam/sequential_cnn.h"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

#include "scorecam/errors.h"
#include "scorecam/prng.h"

namespace scorecam {
namespace {

// Intermediate feature buffer: C x H x W, with dense outputs as N x 1 x 1.
struct Features {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;
};

Features FromTensor(const Tensor& t) {
  Features f;
  f.c = t.dim(0);
  f.h = t.dim(1);
  f.w = t.dim(2);
  f.v = t.values();
  return f;
}

Features ConvForward(const LayerSpec& L, const Features& in) {
  const std::size_t k = L.kernel;
  const std::size_t p = L.padding;
  Features out;
  out.c = L.out_channels;
  out.h = in.h + 2 * p - k + 1;
  out.w = in.w + 2 * p - k + 1;
  out.v.assign(out.c * out.h * out.w, 0.0);
  const std::size_t plane = out.h * out.w;
  for (std::size_t oc = 0; oc < out.c; ++oc) {
    double* dst = out.v.data() + oc * plane;
    std::fill(dst, dst + plane, L.bias[oc]);
    for (std::size_t ic = 0; ic < in.c; ++ic) {
      const double* src = in.v.data() + ic * in.h * in.w;
      const double* wk = L.weight.data() + (oc * in.c + ic) * k * k;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double wv = wk[ky * k + kx];
          for (std::size_t y = 0; y < out.h; ++y) {
            // Source row y + ky - p, skipped when it falls in the padding.
            if (y + ky < p || y + ky - p >= in.h) continue;
            const double* srow = src + (y + ky - p) * in.w;
            double* drow = dst + y * out.w;
            for (std::size_t x = 0; x < out.w; ++x) {
              if (x + kx < p || x + kx - p >= in.w) continue;
              drow[x] += wv * srow[x + kx - p];
            }
          }
        }
      }
    }
  }
  return out;
}

// Gradient w.r.t. the conv input given the gradient w.r.t. its output.
Features ConvBackward(const LayerSpec& L, const Features& in_shape,
                      const Features& gout) {
  const std::size_t k = L.kernel;
  const std::size_t p = L.padding;
  Features gin{in_shape.c, in_shape.h, in_shape.w, {}};
  gin.v.assign(gin.c * gin.h * gin.w, 0.0);
  const std::size_t plane = gout.h * gout.w;
  for (std::size_t oc = 0; oc < gout.c; ++oc) {
    const double* g = gout.v.data() + oc * plane;
    for (std::size_t ic = 0; ic < gin.c; ++ic) {
      double* dst = gin.v.data() + ic * gin.h * gin.w;
      const double* wk = L.weight.data() + (oc * gin.c + ic) * k * k;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double wv = wk[ky * k + kx];
          for (std::size_t y = 0; y < gout.h; ++y) {
            if (y + ky < p || y + ky - p >= gin.h) continue;
            double* drow = dst + (y + ky - p) * gin.w;
            const double* grow = g + y * gout.w;
            for (std::size_t x = 0; x < gout.w; ++x) {
              if (x + kx < p || x + kx - p >= gin.w) continue;
              drow[x + kx - p] += wv * grow[x];
            }
          }
        }
      }
    }
  }
  return gin;
}

Features ReluForward(Features f) {
  for (double& v : f.v) v = v > 0.0 ? v : 0.0;
  return f;
}

Features ReluBackward(const Features& in, Features gout) {
  for (std::size_t i = 0; i < gout.v.size(); ++i) {
    if (!(in.v[i] > 0.0)) gout.v[i] = 0.0;
  }
  return gout;
}

// Flat input index of the first maximum inside pooling window (c, oy, ox).
std::size_t PoolArgMax(const Features& in, std::size_t s, std::size_t c,
                       std::size_t oy, std::size_t ox) {
  std::size_t best = (c * in.h + oy * s) * in.w + ox * s;
  for (std::size_t dy = 0; dy < s; ++dy) {
    for (std::size_t dx = 0; dx < s; ++dx) {
      std::size_t idx = (c * in.h + oy * s + dy) * in.w + ox * s + dx;
      if (in.v[idx] > in.v[best]) best = idx;
    }
  }
  return best;
}

Features PoolForward(const LayerSpec& L, const Features& in) {
  const std::size_t s = L.pool;
  Features out{in.c, in.h / s, in.w / s, {}};
  out.v.resize(out.c * out.h * out.w);
  for (std::size_t c = 0; c < out.c; ++c) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        out.v[(c * out.h + y) * out.w + x] = in.v[PoolArgMax(in, s, c, y, x)];
      }
    }
  }
  return out;
}

Features PoolBackward(const LayerSpec& L, const Features& in,
                      const Features& gout) {
  const std::size_t s = L.pool;
  Features gin{in.c, in.h, in.w, std::vector<double>(in.v.size(), 0.0)};
  for (std::size_t c = 0; c < gout.c; ++c) {
    for (std::size_t y = 0; y < gout.h; ++y) {
      for (std::size_t x = 0; x < gout.w; ++x) {
        gin.v[PoolArgMax(in, s, c, y, x)] +=
            gout.v[(c * gout.h + y) * gout.w + x];
      }
    }
  }
  return gin;
}

Features DenseForward(const LayerSpec& L, const Features& in) {
  Features out{L.out_features, 1, 1, std::vector<double>(L.out_features)};
  for (std::size_t o = 0; o < L.out_features; ++o) {
    const double* row = L.weight.data() + o * L.in_features;
    double acc = L.bias[o];
    for (std::size_t i = 0; i < L.in_features; ++i) acc += row[i] * in.v[i];
    out.v[o] = acc;
  }
  return out;
}

Features DenseBackward(const LayerSpec& L, const Features& in,
                       const Features& gout) {
  Features gin{in.c, in.h, in.w, std::vector<double>(L.in_features, 0.0)};
  for (std::size_t o = 0; o < L.out_features; ++o) {
    const double g = gout.v[o];
    const double* row = L.weight.data() + o * L.in_features;
    for (std::size_t i = 0; i < L.in_features; ++i) gin.v[i] += row[i] * g;
  }
  return gin;
}

Features RunLayer(const LayerSpec& L, Features in) {
  switch (L.type) {
    case LayerType::kConv: return ConvForward(L, in);
    case LayerType::kRelu: return ReluForward(std::move(in));
    case LayerType::kMaxPool: return PoolForward(L, in);
    case LayerType::kDense: return DenseForward(L, in);
  }
  throw FormatError("unknown layer type");
}

Tensor ToLogits(Features f) { return Tensor::Vector(std::move(f.v)); }

void RequireSize(const LayerSpec& L, const char* what,
                 const std::vector<double>& values, const Shape& shape) {
  if (values.size() != ShapeNumel(shape)) {
    throw FormatError("layer '" + L.name + "': " + what + " has " +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(ShapeNumel(shape)));
  }
}

}  // namespace

std::string LayerTypeName(LayerType type) {
  switch (type) {
    case LayerType::kConv: return "conv";
    case LayerType::kRelu: return "relu";
    case LayerType::kMaxPool: return "maxpool";
    case LayerType::kDense: return "dense";
  }
  throw FormatError("unknown layer type");
}

LayerType ParseLayerType(std::string_view name) {
  if (name == "conv") return LayerType::kConv;
  if (name == "relu") return LayerType::kRelu;
  if (name == "maxpool") return LayerType::kMaxPool;
  if (name == "dense") return LayerType::kDense;
  throw FormatError("unknown layer type '" + std::string(name) + "'");
}

Shape LayerSpec::WeightShape() const {
  switch (type) {
    case LayerType::kConv: return {out_channels, in_channels, kernel, kernel};
    case LayerType::kDense: return {out_features, in_features};
    default: return {};
  }
}

Shape LayerSpec::BiasShape() const {
  switch (type) {
    case LayerType::kConv: return {out_channels};
    case LayerType::kDense: return {out_features};
    default: return {};
  }
}

ModelSpec ReferenceArchitecture(Shape input_shape, std::size_t num_classes) {
  if (input_shape.size() != 3) {
    throw ShapeError("reference input must be C x H x W");
  }
  ModelSpec spec;
  spec.input_shape = input_shape;
  spec.num_classes = num_classes;
  spec.tap_layer = "pool2";
  const std::size_t c = input_shape[0];
  const std::size_t tap_h = input_shape[1] / 2 / 2;
  const std::size_t tap_w = input_shape[2] / 2 / 2;

  LayerSpec conv1{.name = "conv1", .type = LayerType::kConv,
                  .in_channels = c, .out_channels = 8, .kernel = 3,
                  .padding = 1};
  LayerSpec conv2{.name = "conv2", .type = LayerType::kConv,
                  .in_channels = 8, .out_channels = 16, .kernel = 3,
                  .padding = 1};
  LayerSpec fc{.name = "fc", .type = LayerType::kDense,
               .in_features = 16 * tap_h * tap_w, .out_features = num_classes};
  spec.layers = {
      conv1,
      {.name = "relu1", .type = LayerType::kRelu},
      {.name = "pool1", .type = LayerType::kMaxPool, .pool = 2},
      conv2,
      {.name = "relu2", .type = LayerType::kRelu},
      {.name = "pool2", .type = LayerType::kMaxPool, .pool = 2},
      fc,
  };
  for (LayerSpec& L : spec.layers) {
    if (L.WeightShape().empty()) continue;
    L.weight.assign(ShapeNumel(L.WeightShape()), 0.0);
    L.bias.assign(ShapeNumel(L.BiasShape()), 0.0);
  }
  return spec;
}

void FillParameters(ModelSpec& spec, std::uint64_t seed, bool zero_bias) {
  SplitMix64 rng(seed);
  spec.seed = seed;
  for (LayerSpec& L : spec.layers) {
    for (double& w : L.weight) w = rng.NextSymmetric(0.1);
    for (double& b : L.bias) b = zero_bias ? 0.0 : rng.NextSymmetric(0.1);
  }
}

SequentialCnn GenerateReference(std::uint64_t seed, bool zero_bias) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, seed, zero_bias);
  return SequentialCnn(std::move(spec));
}

SequentialCnn::SequentialCnn(ModelSpec spec) : spec_(std::move(spec)) {
  if (spec_.input_shape.size() != 3) {
    throw FormatError("input shape must be C x H x W");
  }
  for (std::size_t d : spec_.input_shape) {
    if (d == 0) throw FormatError("input extents must be positive");
  }
  if (spec_.layers.empty()) throw FormatError("model has no layers");

  Shape cur = spec_.input_shape;
  bool flat = false;
  std::size_t tap_index = spec_.layers.size();
  std::size_t last_conv = spec_.layers.size();
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& L = spec_.layers[i];
    if (L.name.empty()) throw FormatError("layer " + std::to_string(i) + " has no name");
    for (std::size_t j = 0; j < i; ++j) {
      if (spec_.layers[j].name == L.name) {
        throw FormatError("duplicate layer name '" + L.name + "'");
      }
    }
    switch (L.type) {
      case LayerType::kConv:
        if (flat) throw FormatError("layer '" + L.name + "': conv after dense");
        if (L.in_channels != cur[0] || L.out_channels == 0 || L.kernel == 0 ||
            cur[1] + 2 * L.padding < L.kernel ||
            cur[2] + 2 * L.padding < L.kernel) {
          throw FormatError("layer '" + L.name + "': conv geometry does not fit input " +
                            ShapeToString(cur));
        }
        cur = {L.out_channels, cur[1] + 2 * L.padding - L.kernel + 1,
               cur[2] + 2 * L.padding - L.kernel + 1};
        last_conv = i;
        break;
      case LayerType::kRelu:
        break;
      case LayerType::kMaxPool:
        if (flat) throw FormatError("layer '" + L.name + "': maxpool after dense");
        if (L.pool == 0 || cur[1] < L.pool || cur[2] < L.pool) {
          throw FormatError("layer '" + L.name + "': pool window does not fit " +
                            ShapeToString(cur));
        }
        cur = {cur[0], cur[1] / L.pool, cur[2] / L.pool};
        break;
      case LayerType::kDense:
        if (L.in_features != ShapeNumel(cur) || L.out_features == 0) {
          throw FormatError("layer '" + L.name + "': dense expects " +
                            std::to_string(ShapeNumel(cur)) + " inputs");
        }
        cur = {L.out_features, 1, 1};
        flat = true;
        break;
    }
    if (L.type == LayerType::kConv || L.type == LayerType::kDense) {
      RequireSize(L, "weight", L.weight, L.WeightShape());
      RequireSize(L, "bias", L.bias, L.BiasShape());
    } else if (!L.weight.empty() || !L.bias.empty()) {
      throw FormatError("layer '" + L.name + "' takes no parameters");
    }
    if (L.name == spec_.tap_layer) {
      if (flat) throw FormatError("tap layer '" + L.name + "' is not spatial");
      tap_index = i;
    }
    output_shapes_.push_back(cur);
  }
  if (!flat || spec_.layers.back().type != LayerType::kDense ||
      output_shapes_.back()[0] != spec_.num_classes) {
    throw FormatError("model must end in a dense layer with " +
                      std::to_string(spec_.num_classes) + " outputs");
  }
  if (tap_index == spec_.layers.size()) {
    throw FormatError("tap layer '" + spec_.tap_layer + "' not found");
  }
  if (last_conv == spec_.layers.size() || tap_index < last_conv) {
    throw FormatError("tap layer '" + spec_.tap_layer +
                      "' must follow the last convolution");
  }

  caps_.input_shape = spec_.input_shape;
  caps_.num_classes = spec_.num_classes;
  caps_.tap_layers = {spec_.tap_layer};
  caps_.supports_forward_from = true;
  caps_.supports_analytic_gradient = true;
}

std::size_t SequentialCnn::LayerIndex(std::string_view layer) const {
  if (!caps_.HasTapLayer(layer)) {
    throw ConfigError("unknown tap layer '" + std::string(layer) + "'");
  }
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    if (spec_.layers[i].name == layer) return i;
  }
  throw ConfigError("unknown tap layer '" + std::string(layer) + "'");
}

Shape SequentialCnn::LayerOutputShape(std::string_view layer) const {
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    if (spec_.layers[i].name == layer) return output_shapes_[i];
  }
  throw ConfigError("unknown layer '" + std::string(layer) + "'");
}

Tensor SequentialCnn::Logits(const Tensor& x) const {
  if (x.shape() != spec_.input_shape) {
    throw ShapeError("input shape " + ShapeToString(x.shape()) + " vs " +
                     ShapeToString(spec_.input_shape));
  }
  Features f = FromTensor(x);
  for (const LayerSpec& L : spec_.layers) f = RunLayer(L, std::move(f));
  return ToLogits(std::move(f));
}

Tensor SequentialCnn::LogitsWithTap(const Tensor& x, std::string_view layer,
                                    ActivationStack* stack) const {
  if (x.shape() != spec_.input_shape) {
    throw ShapeError("input shape " + ShapeToString(x.shape()) + " vs " +
                     ShapeToString(spec_.input_shape));
  }
  const std::size_t tap = LayerIndex(layer);
  Features f = FromTensor(x);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    f = RunLayer(spec_.layers[i], std::move(f));
    if (i == tap && stack != nullptr) {
      stack->layer_id = std::string(layer);
      stack->maps = Tensor({f.c, f.h, f.w}, f.v);
    }
  }
  return ToLogits(std::move(f));
}

Tensor SequentialCnn::LogitsFrom(std::string_view layer,
                                 const ActivationStack& stack) const {
  const std::size_t tap = LayerIndex(layer);
  if (stack.maps.shape() != output_shapes_[tap]) {
    throw ShapeError("stack shape " + ShapeToString(stack.maps.shape()) +
                     " does not match layer '" + std::string(layer) + "' " +
                     ShapeToString(output_shapes_[tap]));
  }
  Features f = FromTensor(stack.maps);
  for (std::size_t i = tap + 1; i < spec_.layers.size(); ++i) {
    f = RunLayer(spec_.layers[i], std::move(f));
  }
  return ToLogits(std::move(f));
}

Tensor SequentialCnn::LogitGradient(const Tensor& x, std::size_t class_index,
                                    std::string_view layer) const {
  if (class_index >= spec_.num_classes) {
    throw ConfigError("class index out of range");
  }
  const std::size_t tap = LayerIndex(layer);
  ActivationStack stack;
  LogitsWithTap(x, layer, &stack);

  // Inputs of every suffix layer, needed by the backward pass.
  std::vector<Features> inputs;
  Features f = FromTensor(stack.maps);
  for (std::size_t i = tap + 1; i < spec_.layers.size(); ++i) {
    inputs.push_back(f);
    f = RunLayer(spec_.layers[i], std::move(f));
  }

  Features g{f.c, f.h, f.w, std::vector<double>(f.v.size(), 0.0)};
  g.v[class_index] = 1.0;
  for (std::size_t i = spec_.layers.size(); i-- > tap + 1;) {
    const LayerSpec& L = spec_.layers[i];
    const Features& in = inputs[i - tap - 1];
    switch (L.type) {
      case LayerType::kConv: g = ConvBackward(L, in, g); break;
      case LayerType::kRelu: g = ReluBackward(in, std::move(g)); break;
      case LayerType::kMaxPool: g = PoolBackward(L, in, g); break;
      case LayerType::kDense: g = DenseBackward(L, in, g); break;
    }
  }
  return Tensor(stack.maps.shape(), std::move(g.v));
}

}  // namespace scorecam

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

#include "scorecam/numerics.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "scorecam/errors.h"

namespace scorecam {
namespace {

template <typename Fn>
Tensor Map(const Tensor& a, Fn fn) {
  std::vector<double> out(a.numel());
  std::span<const double> in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(in[i]);
  return Tensor(a.shape(), std::move(out));
}

// lo + t * (hi - lo), kept inside the closed interval spanned by lo and hi.
inline double Lerp(double lo, double hi, double t) {
  double v = lo + t * (hi - lo);
  return std::clamp(v, std::min(lo, hi), std::max(lo, hi));
}

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

std::vector<Tap> SampleTaps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, last);
    auto i0 = static_cast<std::size_t>(std::floor(src));
    std::size_t i1 = std::min(i0 + 1, in - 1);
    taps[d] = {i0, i1, src - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

GatingFunction ParseGatingFunction(std::string_view name) {
  if (name == "tanh") return GatingFunction::kTanh;
  if (name == "relu") return GatingFunction::kRelu;
  if (name == "sigmoid") return GatingFunction::kSigmoid;
  if (name == "swish") return GatingFunction::kSwish;
  if (name == "mish") return GatingFunction::kMish;
  throw ConfigError("unknown gating function '" + std::string(name) +
                    "' (expected tanh, relu, sigmoid, swish or mish)");
}

std::string GatingFunctionName(GatingFunction fn) {
  switch (fn) {
    case GatingFunction::kTanh: return "tanh";
    case GatingFunction::kRelu: return "relu";
    case GatingFunction::kSigmoid: return "sigmoid";
    case GatingFunction::kSwish: return "swish";
    case GatingFunction::kMish: return "mish";
  }
  throw ConfigError("unknown gating function id");
}

Tensor Hadamard(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("hadamard: " + ShapeToString(a.shape()) + " vs " +
                     ShapeToString(b.shape()));
  }
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor(a.shape(), std::move(out));
}

Tensor MinMaxNormalize(const Tensor& a) {
  const double lo = a.Min();
  const double hi = a.Max();
  if (!(hi > lo)) return Tensor::Zeros(a.shape());
  const double range = hi - lo;
  return Map(a, [&](double v) {
    // Division can round a hair past 1 for huge ranges.
    return std::min((v - lo) / range, 1.0);
  });
}

Tensor TanhMap(const Tensor& a) {
  return Map(a, [](double v) { return std::tanh(v); });
}

Tensor ReluMap(const Tensor& a) {
  return Map(a, [](double v) { return v > 0.0 ? v : 0.0; });
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double Swish(double x) { return x * Sigmoid(x); }

double Mish(double x) { return x * std::tanh(Softplus(x)); }

double ApplyGating(double x, GatingFunction fn) {
  switch (fn) {
    case GatingFunction::kTanh: return std::tanh(x);
    case GatingFunction::kRelu: return x > 0.0 ? x : 0.0;
    case GatingFunction::kSigmoid: return Sigmoid(x);
    case GatingFunction::kSwish: return Swish(x);
    case GatingFunction::kMish: return Mish(x);
  }
  throw ConfigError("unknown gating function id");
}

Tensor Gate(const Tensor& a, GatingFunction fn) {
  // Validates the id before touching data.
  (void)GatingFunctionName(fn);
  return Map(a, [fn](double v) { return ApplyGating(v, fn); });
}

Tensor Softmax(const Tensor& logits) {
  if (logits.rank() != 1) throw ShapeError("softmax expects a 1-D tensor");
  const double peak = logits.Max();
  std::vector<double> out(logits.numel());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return Tensor(logits.shape(), std::move(out));
}

Tensor BilinearUpsample(const Tensor& a, std::size_t out_h, std::size_t out_w) {
  if (a.rank() != 2) throw ShapeError("bilinear_upsample expects a rank-2 map");
  if (out_h == 0 || out_w == 0) {
    throw ShapeError("bilinear_upsample target extents must be positive");
  }
  const std::size_t in_h = a.dim(0);
  const std::size_t in_w = a.dim(1);
  const std::vector<Tap> rows = SampleTaps(in_h, out_h);
  const std::vector<Tap> cols = SampleTaps(in_w, out_w);
  std::span<const double> src = a.data();

  std::vector<double> out(out_h * out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap& r = rows[y];
    const double* top = src.data() + r.i0 * in_w;
    const double* bottom = src.data() + r.i1 * in_w;
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap& c = cols[x];
      double upper = Lerp(top[c.i0], top[c.i1], c.frac);
      double lower = Lerp(bottom[c.i0], bottom[c.i1], c.frac);
      out[y * out_w + x] = Lerp(upper, lower, r.frac);
    }
  }
  return Tensor({out_h, out_w}, std::move(out));
}

Tensor WeightedChannelSum(const Tensor& maps, std::span<const double> weights) {
  if (maps.rank() != 3) {
    throw ShapeError("weighted_channel_sum expects K x h x w maps, got " +
                     ShapeToString(maps.shape()));
  }
  const std::size_t k_count = maps.dim(0);
  if (weights.size() != k_count) {
    throw ShapeError("weighted_channel_sum: " + std::to_string(weights.size()) +
                     " weights for " + std::to_string(k_count) + " channels");
  }
  const std::size_t plane = maps.dim(1) * maps.dim(2);
  std::span<const double> src = maps.data();
  std::vector<double> out(plane, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = weights[k];
    const double* m = src.data() + k * plane;
    for (std::size_t p = 0; p < plane; ++p) out[p] += w * m[p];
  }
  return Tensor({maps.dim(1), maps.dim(2)}, std::move(out));
}

}  // namespace scorecam

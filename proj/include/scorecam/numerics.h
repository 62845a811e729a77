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

#ifndef SCORECAM_NUMERICS_H_
#define SCORECAM_NUMERICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "scorecam/tensor.h"

namespace scorecam {

// Elementwise nonlinearities selectable as the gating function.
enum class GatingFunction { kTanh, kRelu, kSigmoid, kSwish, kMish };

// Throws ConfigError for an unrecognized name.
GatingFunction ParseGatingFunction(std::string_view name);
std::string GatingFunctionName(GatingFunction fn);

// Elementwise product; shapes must match.
Tensor Hadamard(const Tensor& a, const Tensor& b);

// (a - min) / (max - min). A constant tensor maps to all zeros.
Tensor MinMaxNormalize(const Tensor& a);

Tensor TanhMap(const Tensor& a);
Tensor ReluMap(const Tensor& a);
Tensor Gate(const Tensor& a, GatingFunction fn);

// Scalar forms of the gating functions.
double Sigmoid(double x);
double Softplus(double x);
double Swish(double x);
double Mish(double x);
double ApplyGating(double x, GatingFunction fn);

// Max-shifted softmax over a non-empty 1-D tensor.
Tensor Softmax(const Tensor& logits);

// Bilinear resampling of a rank-2 map with half-pixel centers:
//   src = (dst + 0.5) * (in / out) - 0.5, clamped to [0, in - 1].
// Each interpolation step is clamped to its two source values, so constant
// inputs stay exactly constant and outputs never leave [min(a), max(a)].
Tensor BilinearUpsample(const Tensor& a, std::size_t out_h, std::size_t out_w);

// sum_k weights[k] * maps[k] for maps of shape K x h x w, accumulated in
// ascending k for every pixel.
Tensor WeightedChannelSum(const Tensor& maps, std::span<const double> weights);

}  // namespace scorecam

#endif  // SCORECAM_NUMERICS_H_

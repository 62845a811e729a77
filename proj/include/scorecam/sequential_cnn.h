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

#ifndef SCORECAM_SEQUENTIAL_CNN_H_
#define SCORECAM_SEQUENTIAL_CNN_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scorecam/backend.h"
#include "scorecam/tensor.h"

namespace scorecam {

enum class LayerType { kConv, kRelu, kMaxPool, kDense };

std::string LayerTypeName(LayerType type);
LayerType ParseLayerType(std::string_view name);

// One layer of a sequential CNN together with its parameters.
//
//   conv:    weight [out_channels, in_channels, kernel, kernel], bias
//            [out_channels]; stride 1, zero padding `padding` on every side.
//   relu:    no parameters.
//   maxpool: window and stride `pool`, trailing rows/columns dropped.
//   dense:   weight [out_features, in_features], bias [out_features]; the
//            input is flattened in C, H, W order.
struct LayerSpec {
  std::string name;
  LayerType type = LayerType::kRelu;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t padding = 0;
  std::size_t pool = 0;
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  Shape WeightShape() const;
  Shape BiasShape() const;
};

struct ModelSpec {
  std::uint64_t seed = 0;
  Shape input_shape;  // C x H x W
  std::size_t num_classes = 0;
  std::string tap_layer;
  std::vector<LayerSpec> layers;
};

// conv3x3(C->8) relu maxpool2 conv3x3(8->16) relu maxpool2 | dense.
// The tap is "pool2", the output of the last convolutional block.
// Parameters are zero-filled.
ModelSpec ReferenceArchitecture(Shape input_shape = {3, 64, 64},
                                std::size_t num_classes = 10);

// Draws every weight (and, unless zero_bias, every bias) uniformly from
// [-0.1, 0.1) using SplitMix64(seed), rounded to float, in layer order with
// weights before biases.
void FillParameters(ModelSpec& spec, std::uint64_t seed, bool zero_bias = false);

// The reference classifier: a sequential CNN executed with scalar loops in
// double precision.
class SequentialCnn final : public ClassifierBackend {
 public:
  // Validates the layer chain and parameter sizes; throws FormatError.
  explicit SequentialCnn(ModelSpec spec);

  const BackendCapabilities& capabilities() const override { return caps_; }
  const ModelSpec& spec() const { return spec_; }
  // Output shape of the named layer (K x h x w for the tap).
  Shape LayerOutputShape(std::string_view layer) const;

  Tensor Logits(const Tensor& x) const override;
  Tensor LogitsWithTap(const Tensor& x, std::string_view layer,
                       ActivationStack* stack) const override;
  Tensor LogitsFrom(std::string_view layer,
                    const ActivationStack& stack) const override;
  Tensor LogitGradient(const Tensor& x, std::size_t class_index,
                       std::string_view layer) const override;

 private:
  std::size_t LayerIndex(std::string_view layer) const;

  ModelSpec spec_;
  std::vector<Shape> output_shapes_;
  BackendCapabilities caps_;
};

SequentialCnn GenerateReference(std::uint64_t seed, bool zero_bias = false);

}  // namespace scorecam

#endif  // SCORECAM_SEQUENTIAL_CNN_H_

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

#ifndef SCORECAM_BACKEND_H_
#define SCORECAM_BACKEND_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorecam/tensor.h"

namespace scorecam {

struct BackendCapabilities {
  Shape input_shape;  // C x H x W
  std::size_t num_classes = 0;
  std::vector<std::string> tap_layers;
  bool supports_forward_from = false;
  bool supports_analytic_gradient = false;

  bool HasTapLayer(std::string_view layer) const;
};

// Post-activation feature maps of one tapped layer, K x h x w.
struct ActivationStack {
  std::string layer_id;
  Tensor maps;

  std::size_t channels() const { return maps.dim(0); }
  std::size_t height() const { return maps.dim(1); }
  std::size_t width() const { return maps.dim(2); }
};

// Classifier with intermediate-activation capture.
//
// Implementations are immutable after construction: every const method may be
// called concurrently from any number of threads, and repeated calls on the
// same input return bit-identical results.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  virtual const BackendCapabilities& capabilities() const = 0;

  // Raw class scores for one input of capabilities().input_shape.
  virtual Tensor Logits(const Tensor& x) const = 0;

  // Logits plus the activations of `layer`. The logits must equal Logits(x)
  // bit for bit.
  virtual Tensor LogitsWithTap(const Tensor& x, std::string_view layer,
                               ActivationStack* stack) const = 0;

  // Runs only the layers after `layer`, starting from `stack`.
  virtual Tensor LogitsFrom(std::string_view layer,
                            const ActivationStack& stack) const;

  // d logits[class_index] / d activations(layer), shaped like the stack.
  virtual Tensor LogitGradient(const Tensor& x, std::size_t class_index,
                               std::string_view layer) const;

  // Logits for several inputs. The default evaluates them one by one; a
  // backend that batches must still return exactly what Logits() would.
  virtual std::vector<Tensor> LogitsBatch(std::span<const Tensor> xs) const;
};

struct Prediction {
  Tensor logits;
  Tensor probs;
};

struct TappedPrediction {
  Tensor logits;
  Tensor probs;
  ActivationStack stack;
};

// Validated entry points. These check shapes and capabilities before handing
// off to the backend and derive probabilities with Softmax.
Prediction Forward(const ClassifierBackend& backend, const Tensor& x);
TappedPrediction ForwardWithTap(const ClassifierBackend& backend,
                                const Tensor& x, std::string_view layer);
Tensor ForwardFrom(const ClassifierBackend& backend, std::string_view layer,
                   const ActivationStack& stack);
Tensor AnalyticGradient(const ClassifierBackend& backend, const Tensor& x,
                        std::size_t class_index, std::string_view layer);

// Central differences of ForwardFrom around the activations of x at `layer`,
// with step max(1e-4, 1e-4 * |a|) per element.
Tensor FiniteDifferenceGradient(const ClassifierBackend& backend,
                                const Tensor& x, std::size_t class_index,
                                std::string_view layer);

// Index of the largest probability; ties go to the lowest index.
std::size_t ArgMax(const Tensor& values);

}  // namespace scorecam

#endif  // SCORECAM_BACKEND_H_

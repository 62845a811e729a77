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

#include "scorecam/backend.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "scorecam/errors.h"
#include "scorecam/numerics.h"

namespace scorecam {
namespace {

void CheckInput(const BackendCapabilities& caps, const Tensor& x) {
  if (x.shape() != caps.input_shape) {
    throw ShapeError("input shape " + ShapeToString(x.shape()) +
                     " does not match backend input " +
                     ShapeToString(caps.input_shape));
  }
}

void CheckLayer(const BackendCapabilities& caps, std::string_view layer) {
  if (!caps.HasTapLayer(layer)) {
    throw ConfigError("unknown tap layer '" + std::string(layer) + "'");
  }
}

void CheckLogits(const BackendCapabilities& caps, const Tensor& logits) {
  if (logits.rank() != 1 || logits.numel() != caps.num_classes) {
    throw ShapeError("backend returned logits of shape " +
                     ShapeToString(logits.shape()) + ", expected [" +
                     std::to_string(caps.num_classes) + "]");
  }
}

}  // namespace

bool BackendCapabilities::HasTapLayer(std::string_view layer) const {
  return std::find(tap_layers.begin(), tap_layers.end(), layer) !=
         tap_layers.end();
}

Tensor ClassifierBackend::LogitsFrom(std::string_view layer,
                                     const ActivationStack&) const {
  throw CapabilityError("backend cannot resume from layer '" +
                        std::string(layer) + "'");
}

Tensor ClassifierBackend::LogitGradient(const Tensor&, std::size_t,
                                        std::string_view) const {
  throw CapabilityError("backend has no analytic gradient");
}

std::vector<Tensor> ClassifierBackend::LogitsBatch(
    std::span<const Tensor> xs) const {
  std::vector<Tensor> out;
  out.reserve(xs.size());
  for (const Tensor& x : xs) out.push_back(Logits(x));
  return out;
}

Prediction Forward(const ClassifierBackend& backend, const Tensor& x) {
  const BackendCapabilities& caps = backend.capabilities();
  CheckInput(caps, x);
  Tensor logits = backend.Logits(x);
  CheckLogits(caps, logits);
  Tensor probs = Softmax(logits);
  return {std::move(logits), std::move(probs)};
}

TappedPrediction ForwardWithTap(const ClassifierBackend& backend,
                                const Tensor& x, std::string_view layer) {
  const BackendCapabilities& caps = backend.capabilities();
  CheckInput(caps, x);
  CheckLayer(caps, layer);
  ActivationStack stack;
  Tensor logits = backend.LogitsWithTap(x, layer, &stack);
  CheckLogits(caps, logits);
  if (stack.maps.rank() != 3) {
    throw ShapeError("tap layer '" + std::string(layer) +
                     "' did not yield a K x h x w stack");
  }
  Tensor probs = Softmax(logits);
  return {std::move(logits), std::move(probs), std::move(stack)};
}

Tensor ForwardFrom(const ClassifierBackend& backend, std::string_view layer,
                   const ActivationStack& stack) {
  const BackendCapabilities& caps = backend.capabilities();
  if (!caps.supports_forward_from) {
    throw CapabilityError("backend does not support forward_from");
  }
  CheckLayer(caps, layer);
  Tensor logits = backend.LogitsFrom(layer, stack);
  CheckLogits(caps, logits);
  return logits;
}

Tensor AnalyticGradient(const ClassifierBackend& backend, const Tensor& x,
                        std::size_t class_index, std::string_view layer) {
  const BackendCapabilities& caps = backend.capabilities();
  if (!caps.supports_analytic_gradient) {
    throw CapabilityError("backend does not support analytic gradients");
  }
  CheckInput(caps, x);
  CheckLayer(caps, layer);
  if (class_index >= caps.num_classes) {
    throw ConfigError("class index " + std::to_string(class_index) +
                      " out of range");
  }
  return backend.LogitGradient(x, class_index, layer);
}

Tensor FiniteDifferenceGradient(const ClassifierBackend& backend,
                                const Tensor& x, std::size_t class_index,
                                std::string_view layer) {
  const BackendCapabilities& caps = backend.capabilities();
  if (class_index >= caps.num_classes) {
    throw ConfigError("class index " + std::to_string(class_index) +
                      " out of range");
  }
  TappedPrediction base = ForwardWithTap(backend, x, layer);
  const Shape shape = base.stack.maps.shape();
  const std::vector<double>& values = base.stack.maps.values();
  std::vector<double> grad(values.size());
  std::vector<double> probe = values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double a = values[i];
    const double eps = std::max(1e-4, 1e-4 * std::abs(a));
    probe[i] = a + eps;
    ActivationStack plus{std::string(layer), Tensor(shape, probe)};
    probe[i] = a - eps;
    ActivationStack minus{std::string(layer), Tensor(shape, probe)};
    probe[i] = a;
    const double up = ForwardFrom(backend, layer, plus)[class_index];
    const double down = ForwardFrom(backend, layer, minus)[class_index];
    grad[i] = (up - down) / (2.0 * eps);
  }
  return Tensor(shape, std::move(grad));
}

std::size_t ArgMax(const Tensor& values) {
  if (values.empty()) throw ShapeError("argmax of empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.numel(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace scorecam

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

#include "scorecam/cam.h"

#include <algorithm>
#include <utility>

#include "scorecam/parallel.h"

namespace scorecam {
namespace {

// x o mask for a C x H x W input and an H x W mask.
Tensor ApplyMask(const Tensor& x, std::span<const double> mask) {
  const std::size_t plane = x.dim(1) * x.dim(2);
  std::vector<double> out(x.numel());
  std::span<const double> src = x.data();
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = src[c * plane + p] * mask[p];
    }
  }
  return Tensor(x.shape(), std::move(out));
}

double ClassProbability(const ClassifierBackend& backend, const Tensor& logits,
                        std::size_t class_index) {
  if (logits.rank() != 1 || logits.numel() != backend.capabilities().num_classes) {
    throw ShapeError("backend returned logits of shape " +
                     ShapeToString(logits.shape()));
  }
  return Softmax(logits)[class_index];
}

void CheckClass(const ClassifierBackend& backend, std::size_t class_index) {
  if (class_index >= backend.capabilities().num_classes) {
    throw ConfigError("target class " + std::to_string(class_index) +
                      " out of range for " +
                      std::to_string(backend.capabilities().num_classes) +
                      " classes");
  }
}

SaliencyMap ScoreWeighted(const ClassifierBackend& backend, const Tensor& x,
                          std::size_t class_index, std::string_view layer,
                          const CamConfig& cfg) {
  CheckClass(backend, class_index);
  TappedPrediction tapped = ForwardWithTap(backend, x, layer);
  const std::size_t h = x.dim(1);
  const std::size_t w = x.dim(2);
  Tensor masks = BuildMasks(tapped.stack, cfg, h, w);
  CicWeights weights = CicScores(backend, x, class_index, masks, cfg);
  std::optional<GatingFunction> gating;
  if (cfg.gate_aggregation) gating = cfg.gating;
  return AggregateSaliency(tapped.stack.maps, weights.scores, gating, h, w);
}

}  // namespace

std::string CamMethodName(CamMethod method) {
  switch (method) {
    case CamMethod::kGradCam: return "gradcam";
    case CamMethod::kScoreCam: return "scorecam";
    case CamMethod::kScoreCamPP: return "scorecampp";
  }
  throw ConfigError("unknown CAM method id");
}

CamMethod ParseCamMethod(std::string_view name) {
  if (name == "gradcam") return CamMethod::kGradCam;
  if (name == "scorecam") return CamMethod::kScoreCam;
  if (name == "scorecampp" || name == "scorecam++") return CamMethod::kScoreCamPP;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected gradcam, scorecam or scorecampp)");
}

CamConfig CamConfig::ForMethod(CamMethod method) {
  CamConfig cfg;
  cfg.method = method;
  const bool gated = method == CamMethod::kScoreCamPP;
  cfg.gate_normalizer = gated;
  cfg.gate_aggregation = gated;
  return cfg;
}

std::string CamConfig::Label() const {
  std::string label = CamMethodName(method);
  std::vector<std::string> extras;
  if (method == CamMethod::kScoreCamPP) {
    if (gating != GatingFunction::kTanh) {
      extras.push_back("gating=" + GatingFunctionName(gating));
    }
    if (!gate_normalizer) extras.emplace_back("normalizer=off");
    if (!gate_aggregation) extras.emplace_back("aggregation=off");
  }
  if (cic_softmax && method != CamMethod::kGradCam) extras.emplace_back("cic_softmax=on");
  if (target_class) extras.push_back("class=" + std::to_string(*target_class));
  if (extras.empty()) return label;
  label += '[';
  for (std::size_t i = 0; i < extras.size(); ++i) {
    if (i) label += ';';
    label += extras[i];
  }
  label += ']';
  return label;
}

Tensor BuildMasks(const ActivationStack& stack, const CamConfig& cfg,
                  std::size_t input_h, std::size_t input_w) {
  const Tensor& maps = stack.maps;
  if (maps.rank() != 3) {
    throw ShapeError("activation stack must be K x h x w, got " +
                     ShapeToString(maps.shape()));
  }
  const std::size_t k_count = maps.dim(0);
  std::vector<Tensor> masks;
  masks.reserve(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    Tensor up = BilinearUpsample(maps.Slice(k), input_h, input_w);
    masks.push_back(cfg.gate_normalizer ? Gate(up, cfg.gating)
                                        : MinMaxNormalize(up));
  }
  return Stack(masks);
}

CicWeights CicScores(const ClassifierBackend& backend, const Tensor& x,
                     std::size_t class_index, const Tensor& masks,
                     const CamConfig& cfg) {
  CheckClass(backend, class_index);
  if (x.rank() != 3) throw ShapeError("input must be C x H x W");
  if (masks.rank() != 3 || masks.dim(1) != x.dim(1) || masks.dim(2) != x.dim(2)) {
    throw ShapeError("masks " + ShapeToString(masks.shape()) +
                     " do not match input " + ShapeToString(x.shape()));
  }
  const double baseline = Forward(backend, x).probs[class_index];

  const std::size_t k_count = masks.dim(0);
  const std::size_t plane = masks.dim(1) * masks.dim(2);
  const std::size_t batch = std::max<std::size_t>(1, cfg.mask_batch_size);
  const std::size_t batches = (k_count + batch - 1) / batch;
  std::span<const double> all = masks.data();
  std::vector<double> scores(k_count);

  auto masked = [&](std::size_t k) {
    return ApplyMask(x, all.subspan(k * plane, plane));
  };
  ParallelFor(batches, cfg.workers, [&](std::size_t b) {
    const std::size_t first = b * batch;
    const std::size_t last = std::min(k_count, first + batch);
    std::vector<Tensor> inputs;
    inputs.reserve(last - first);
    for (std::size_t k = first; k < last; ++k) inputs.push_back(masked(k));
    std::vector<Tensor> logits;
    try {
      logits = backend.LogitsBatch(inputs);
      if (logits.size() != inputs.size()) {
        throw ShapeError("backend returned " + std::to_string(logits.size()) +
                         " results for a batch of " + std::to_string(inputs.size()));
      }
      for (std::size_t k = first; k < last; ++k) {
        scores[k] = ClassProbability(backend, logits[k - first], class_index) - baseline;
      }
    } catch (const std::exception&) {
      // Re-run one by one so the error names the failing channel.
      for (std::size_t k = first; k < last; ++k) {
        try {
          scores[k] = ClassProbability(backend, backend.Logits(inputs[k - first]),
                                       class_index) - baseline;
        } catch (const std::exception& e) {
          throw ChannelError(k, e.what());
        }
      }
    }
  });

  CicWeights out{class_index, std::move(scores)};
  if (cfg.cic_softmax) out.scores = Softmax(Tensor::Vector(out.scores)).values();
  return out;
}

SaliencyMap AggregateSaliency(const Tensor& maps, std::span<const double> weights,
                              std::optional<GatingFunction> gating,
                              std::size_t out_h, std::size_t out_w) {
  Tensor summed = gating ? WeightedChannelSum(Gate(maps, *gating), weights)
                         : WeightedChannelSum(maps, weights);
  SaliencyMap map;
  map.raw = ReluMap(summed);
  map.normalized_full = MinMaxNormalize(BilinearUpsample(map.raw, out_h, out_w));
  return map;
}

SaliencyMap GradCam(const ClassifierBackend& backend, const Tensor& x,
                    std::size_t class_index, std::string_view layer,
                    GradientMode mode) {
  CheckClass(backend, class_index);
  const BackendCapabilities& caps = backend.capabilities();
  if (mode == GradientMode::kAuto) {
    if (caps.supports_analytic_gradient) {
      mode = GradientMode::kAnalytic;
    } else if (caps.supports_forward_from) {
      mode = GradientMode::kFiniteDifference;
    } else {
      throw CapabilityError("gradcam needs analytic gradients or forward_from");
    }
  }
  TappedPrediction tapped = ForwardWithTap(backend, x, layer);
  Tensor grad = mode == GradientMode::kAnalytic
                    ? AnalyticGradient(backend, x, class_index, layer)
                    : FiniteDifferenceGradient(backend, x, class_index, layer);
  if (grad.shape() != tapped.stack.maps.shape()) {
    throw ShapeError("gradient shape does not match activation stack");
  }
  // Global average pooling of each channel's gradient.
  const std::size_t k_count = grad.dim(0);
  const std::size_t plane = grad.dim(1) * grad.dim(2);
  std::vector<double> alpha(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    double s = 0.0;
    for (std::size_t p = 0; p < plane; ++p) s += grad[k * plane + p];
    alpha[k] = s / static_cast<double>(plane);
  }
  return AggregateSaliency(tapped.stack.maps, alpha, std::nullopt, x.dim(1),
                           x.dim(2));
}

SaliencyMap ScoreCam(const ClassifierBackend& backend, const Tensor& x,
                     std::size_t class_index, std::string_view layer,
                     const CamConfig& cfg) {
  CamConfig plain = cfg;
  plain.method = CamMethod::kScoreCam;
  plain.gate_normalizer = false;
  plain.gate_aggregation = false;
  return ScoreWeighted(backend, x, class_index, layer, plain);
}

SaliencyMap ScoreCamPP(const ClassifierBackend& backend, const Tensor& x,
                       std::size_t class_index, std::string_view layer,
                       const CamConfig& cfg) {
  return ScoreWeighted(backend, x, class_index, layer, cfg);
}

std::size_t ResolveTargetClass(const Prediction& prediction, const CamConfig& cfg) {
  if (cfg.target_class) {
    if (*cfg.target_class >= prediction.probs.numel()) {
      throw ConfigError("target class " + std::to_string(*cfg.target_class) +
                        " out of range");
    }
    return *cfg.target_class;
  }
  return ArgMax(prediction.probs);
}

Explanation Explain(const ClassifierBackend& backend, const Tensor& x,
                    std::string_view layer, const CamConfig& cfg) {
  Explanation out;
  out.prediction = Forward(backend, x);
  out.class_index = ResolveTargetClass(out.prediction, cfg);
  switch (cfg.method) {
    case CamMethod::kGradCam:
      out.map = GradCam(backend, x, out.class_index, layer, cfg.gradient);
      break;
    case CamMethod::kScoreCam:
      out.map = ScoreCam(backend, x, out.class_index, layer, cfg);
      break;
    case CamMethod::kScoreCamPP:
      out.map = ScoreCamPP(backend, x, out.class_index, layer, cfg);
      break;
  }
  return out;
}

}  // namespace scorecam

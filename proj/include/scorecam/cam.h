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

#ifndef SCORECAM_CAM_H_
#define SCORECAM_CAM_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorecam/backend.h"
#include "scorecam/errors.h"
#include "scorecam/numerics.h"
#include "scorecam/tensor.h"

namespace scorecam {

enum class CamMethod { kGradCam, kScoreCam, kScoreCamPP };

std::string CamMethodName(CamMethod method);
CamMethod ParseCamMethod(std::string_view name);

// How GradCAM obtains d logit / d activations.
enum class GradientMode { kAuto, kAnalytic, kFiniteDifference };

struct CamConfig {
  CamMethod method = CamMethod::kScoreCamPP;
  GatingFunction gating = GatingFunction::kTanh;
  // Replace min-max mask normalization with `gating`.
  bool gate_normalizer = true;
  // Apply `gating` to the activations inside the weighted sum.
  bool gate_aggregation = true;
  // Softmax across the K channel scores before aggregation.
  bool cic_softmax = false;
  std::size_t mask_batch_size = 32;
  // Unset means the predicted class of the unmasked input.
  std::optional<std::size_t> target_class;
  std::size_t workers = 1;
  GradientMode gradient = GradientMode::kAuto;

  // Defaults for `method`: both gating flags on for ScoreCAM++, off
  // otherwise.
  static CamConfig ForMethod(CamMethod method);

  // Method name plus any non-default ablation settings, e.g.
  // "scorecampp[gating=sigmoid;aggregation=off]". Worker and batch settings
  // never appear since they cannot change results.
  std::string Label() const;
};

// Per-channel confidence increase for one class.
struct CicWeights {
  std::size_t class_index = 0;
  std::vector<double> scores;
};

struct SaliencyMap {
  Tensor raw;              // h x w, activation resolution, >= 0
  Tensor normalized_full;  // H x W, input resolution, in [0, 1]
};

// Raised when the backend fails on one masked input.
class ChannelError : public Error {
 public:
  ChannelError(std::size_t channel, const std::string& what)
      : Error("channel " + std::to_string(channel) + ": " + what),
        channel_(channel) {}
  std::size_t channel() const { return channel_; }

 private:
  std::size_t channel_;
};

// One mask per channel: s(Up(A_k)) at input resolution, where s is min-max
// normalization, or cfg.gating when cfg.gate_normalizer is set.
Tensor BuildMasks(const ActivationStack& stack, const CamConfig& cfg,
                  std::size_t input_h, std::size_t input_w);

// scores[k] = p_c(x o masks[k]) - p_c(x), with each single-channel mask
// replicated over the channels of x. Masked forwards run in batches of
// cfg.mask_batch_size across cfg.workers threads; the result never depends
// on either setting.
CicWeights CicScores(const ClassifierBackend& backend, const Tensor& x,
                     std::size_t class_index, const Tensor& masks,
                     const CamConfig& cfg);

// ReLU(sum_k w_k * g(A_k)) with g = gating (or identity when unset), then
// the min-max normalized upsample to out_h x out_w.
SaliencyMap AggregateSaliency(const Tensor& maps, std::span<const double> weights,
                              std::optional<GatingFunction> gating,
                              std::size_t out_h, std::size_t out_w);

SaliencyMap GradCam(const ClassifierBackend& backend, const Tensor& x,
                    std::size_t class_index, std::string_view layer,
                    GradientMode mode = GradientMode::kAuto);

// Gating flags in cfg are ignored; ScoreCAM always uses min-max masks and
// plain activations.
SaliencyMap ScoreCam(const ClassifierBackend& backend, const Tensor& x,
                     std::size_t class_index, std::string_view layer,
                     const CamConfig& cfg = CamConfig::ForMethod(CamMethod::kScoreCam));

SaliencyMap ScoreCamPP(const ClassifierBackend& backend, const Tensor& x,
                       std::size_t class_index, std::string_view layer,
                       const CamConfig& cfg = CamConfig::ForMethod(CamMethod::kScoreCamPP));

struct Explanation {
  std::size_t class_index = 0;
  Prediction prediction;  // on the unmasked input
  SaliencyMap map;
};

// Argmax of probs (lowest index on ties) unless cfg.target_class is set.
std::size_t ResolveTargetClass(const Prediction& prediction, const CamConfig& cfg);

// Resolves the target class and dispatches on cfg.method.
Explanation Explain(const ClassifierBackend& backend, const Tensor& x,
                    std::string_view layer, const CamConfig& cfg);

}  // namespace scorecam

#endif  // SCORECAM_CAM_H_

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

#ifndef SCORECAM_METRICS_H_
#define SCORECAM_METRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scorecam/cam.h"
#include "scorecam/tensor.h"

namespace scorecam {

// Confidences of one method on one image.
struct ConfidenceRecord {
  std::string image_id;
  std::string method;
  std::size_t class_index = 0;
  double y_full = 0.0;         // p_c on the whole image
  double o_masked = 0.0;       // p_c on the explanation-masked image
  double logit_full = 0.0;
  double logit_removed = 0.0;  // logit_c with the salient region removed
};

struct MethodMetrics {
  double average_drop_pct = 0.0;
  double increase_in_confidence_pct = 0.0;
  // Unset when fewer than two methods were compared.
  std::optional<double> win_pct;
  double avg_logit_drop = 0.0;
};

struct MetricsReport {
  std::size_t n = 0;  // images per method
  std::vector<std::string> methods;  // in first-seen order
  std::map<std::string, MethodMetrics> per_method;
};

// x o m with the map broadcast over the channels of x, and x o (1 - m).
// Both are derived from one product plus an exact subtraction, so
// MaskedInput(x, m) + RemovedInput(x, m) == x holds bit for bit.
Tensor MaskedInput(const Tensor& x, const SaliencyMap& map);
Tensor RemovedInput(const Tensor& x, const SaliencyMap& map);

// 100 / N * sum_i max(0, y_i - O_i) / y_i; samples with y_i == 0 add 0.
double AverageDrop(std::span<const ConfidenceRecord> records);
// 100 / N * #{i : y_i < O_i}.
double IncreaseInConfidence(std::span<const ConfidenceRecord> records);
// Mean of logit_full - logit_removed.
double AverageLogitDrop(std::span<const ConfidenceRecord> records);

// For each image, every method whose drop y - O equals the smallest drop
// scores a win; returns 100 * wins / N per method. Needs at least two
// methods and one record for every (image, method) pair.
std::map<std::string, double> WinPercentage(std::span<const ConfidenceRecord> records);

// All four metrics per method. Win % is computed only when the records
// cover two or more methods.
MetricsReport Aggregate(std::span<const ConfidenceRecord> records);

}  // namespace scorecam

#endif  // SCORECAM_METRICS_H_

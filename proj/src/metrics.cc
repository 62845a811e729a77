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

#include "scorecam/metrics.h"

#include <algorithm>
#include <set>
#include <utility>

#include "scorecam/errors.h"

namespace scorecam {
namespace {

// Returns {masked, removed}. Whichever factor (m or 1 - m) is >= 0.5 goes
// through the product; the other part is x minus that product, which is
// exact by Sterbenz's lemma.
std::pair<Tensor, Tensor> SplitInput(const Tensor& x, const SaliencyMap& map) {
  const Tensor& m = map.normalized_full;
  if (x.rank() != 3 || m.rank() != 2 || x.dim(1) != m.dim(0) ||
      x.dim(2) != m.dim(1)) {
    throw ShapeError("saliency map " + ShapeToString(m.shape()) +
                     " does not match input " + ShapeToString(x.shape()));
  }
  const std::size_t plane = m.numel();
  std::vector<double> masked(x.numel());
  std::vector<double> removed(x.numel());
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      const std::size_t i = c * plane + p;
      const double v = x[i];
      const double s = m[p];
      if (s >= 0.5) {
        masked[i] = v * s;
        removed[i] = v - masked[i];
      } else {
        removed[i] = v * (1.0 - s);
        masked[i] = v - removed[i];
      }
    }
  }
  return {Tensor(x.shape(), std::move(masked)), Tensor(x.shape(), std::move(removed))};
}

// Sums in ascending value order so the result does not depend on the order
// the records arrive in.
double OrderFreeSum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

void RequireRecords(std::span<const ConfidenceRecord> records, const char* what) {
  if (records.empty()) {
    throw ConfigError(std::string(what) + " needs at least one record");
  }
}

}  // namespace

Tensor MaskedInput(const Tensor& x, const SaliencyMap& map) {
  return SplitInput(x, map).first;
}

Tensor RemovedInput(const Tensor& x, const SaliencyMap& map) {
  return SplitInput(x, map).second;
}

double AverageDrop(std::span<const ConfidenceRecord> records) {
  RequireRecords(records, "average_drop");
  std::vector<double> terms;
  terms.reserve(records.size());
  for (const ConfidenceRecord& r : records) {
    if (r.y_full == 0.0) continue;
    terms.push_back(std::max(0.0, r.y_full - r.o_masked) / r.y_full);
  }
  return OrderFreeSum(std::move(terms)) * 100.0 /
         static_cast<double>(records.size());
}

double IncreaseInConfidence(std::span<const ConfidenceRecord> records) {
  RequireRecords(records, "increase_in_confidence");
  std::size_t hits = 0;
  for (const ConfidenceRecord& r : records) {
    if (r.y_full < r.o_masked) ++hits;
  }
  return static_cast<double>(hits) * 100.0 / static_cast<double>(records.size());
}

double AverageLogitDrop(std::span<const ConfidenceRecord> records) {
  RequireRecords(records, "average_logit_drop");
  std::vector<double> terms;
  terms.reserve(records.size());
  for (const ConfidenceRecord& r : records) terms.push_back(r.logit_full - r.logit_removed);
  return OrderFreeSum(std::move(terms)) / static_cast<double>(records.size());
}

std::map<std::string, double> WinPercentage(std::span<const ConfidenceRecord> records) {
  std::set<std::string> methods;
  std::map<std::string, std::map<std::string, double>> drops;  // image -> method
  for (const ConfidenceRecord& r : records) {
    methods.insert(r.method);
    if (!drops[r.image_id].emplace(r.method, r.y_full - r.o_masked).second) {
      throw ConfigError("duplicate record for image '" + r.image_id +
                        "', method '" + r.method + "'");
    }
  }
  if (methods.size() < 2) {
    throw ConfigError("win percentage needs at least two methods");
  }
  std::map<std::string, double> wins;
  for (const std::string& m : methods) wins[m] = 0.0;
  for (const auto& [image, per_method] : drops) {
    if (per_method.size() != methods.size()) {
      for (const std::string& m : methods) {
        if (!per_method.contains(m)) {
          throw ConfigError("missing record for image '" + image +
                            "', method '" + m + "'");
        }
      }
    }
    double best = per_method.begin()->second;
    for (const auto& [m, d] : per_method) best = std::min(best, d);
    for (const auto& [m, d] : per_method) {
      if (d == best) wins[m] += 1.0;
    }
  }
  const auto n = static_cast<double>(drops.size());
  for (auto& [m, w] : wins) w = w * 100.0 / n;
  return wins;
}

MetricsReport Aggregate(std::span<const ConfidenceRecord> records) {
  MetricsReport report;
  std::map<std::string, std::vector<ConfidenceRecord>> grouped;
  for (const ConfidenceRecord& r : records) {
    if (!grouped.contains(r.method)) report.methods.push_back(r.method);
    grouped[r.method].push_back(r);
  }
  std::optional<std::map<std::string, double>> wins;
  if (grouped.size() >= 2) wins = WinPercentage(records);
  for (const auto& [method, rows] : grouped) {
    MethodMetrics m;
    m.average_drop_pct = AverageDrop(rows);
    m.increase_in_confidence_pct = IncreaseInConfidence(rows);
    m.avg_logit_drop = AverageLogitDrop(rows);
    if (wins) m.win_pct = wins->at(method);
    report.per_method[method] = m;
    report.n = std::max(report.n, rows.size());
  }
  return report;
}

}  // namespace scorecam

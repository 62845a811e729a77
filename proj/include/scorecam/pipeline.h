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

#ifndef SCORECAM_PIPELINE_H_
#define SCORECAM_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scorecam/backend.h"
#include "scorecam/cam.h"
#include "scorecam/image.h"
#include "scorecam/metrics.h"

namespace scorecam {

enum class ReportFormat { kCsv, kJson };

ReportFormat ParseReportFormat(std::string_view name);

struct RunConfig {
  // Weight file; when empty the reference CNN is generated from `seed`.
  std::filesystem::path model_path;
  // Image files, in report order.
  std::vector<std::filesystem::path> images;
  std::vector<CamConfig> methods;
  // Empty selects the backend's first tap layer.
  std::string tap_layer;
  std::filesystem::path output_dir = "out";
  ReportFormat report_format = ReportFormat::kCsv;
  std::size_t mask_batch_size = 32;
  std::size_t workers = 1;
  std::uint64_t seed = 42;
  double overlay_alpha = 0.5;
};

// Raw option values as given in a config file or on the command line. Unset
// fields fall through to the next source.
struct RunOptions {
  std::optional<std::string> model;
  std::vector<std::string> images;   // files or directories
  std::vector<std::string> methods;  // method specs, see ParseMethodSpec
  std::optional<std::string> tap_layer;
  std::optional<std::string> gating;
  std::optional<bool> gate_aggregation;
  std::optional<bool> gate_normalizer;
  std::optional<bool> cic_softmax;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<std::string> report_format;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
};

// Flat "key = value" lines; '#' starts a comment. Keys: model, images,
// method, tap_layer, gating, gate_aggregation, gate_normalizer, cic_softmax,
// batch_size, workers, out, report_format, seed, alpha. `images` and
// `method` may repeat, and `images` also accepts a comma-separated list.
RunOptions ParseConfigText(std::string_view text);
RunOptions ReadConfigFile(const std::filesystem::path& path);

// Fields set in `overrides` win; non-empty lists replace.
RunOptions MergeOptions(const RunOptions& base, const RunOptions& overrides);

// "name" or "name:key=value,key=value" with keys gating, aggregation,
// normalizer (on/off), cic_softmax (on/off) and class (index). Settings not
// named in the spec come from `defaults`.
CamConfig ParseMethodSpec(std::string_view spec, const CamConfig& defaults);

// Expands directories (sorted *.png / *.bmp), applies defaults and validates.
RunConfig ResolveRunConfig(const RunOptions& options);

struct ImageFailure {
  std::string image_id;
  std::string message;
};

struct BatchResult {
  std::vector<ConfidenceRecord> records;  // image-major, methods in order
  MetricsReport report;
  std::vector<ImageFailure> failures;
  std::vector<std::filesystem::path> written;  // PNGs, then the report
};

// Explains one preprocessed input with one method and measures the
// confidences used by the evaluation metrics.
struct MethodOutcome {
  Explanation explanation;
  ConfidenceRecord record;
};
MethodOutcome EvaluateMethod(const ClassifierBackend& backend, const Tensor& x,
                             std::string_view layer, const CamConfig& cfg,
                             std::string image_id);

// Preprocessing for a backend: resize to its input H x W, ImageNet mean/std.
PreprocessSpec PreprocessFor(const ClassifierBackend& backend);

std::unique_ptr<ClassifierBackend> LoadBackend(const RunConfig& cfg);

// Runs every method on every image, writes per-(image, method) saliency and
// overlay PNGs and one report. Failed images are recorded and skipped;
// throws if the image list is empty or every image fails.
BatchResult RunBatch(const RunConfig& cfg, const ClassifierBackend& backend);
BatchResult RunBatch(const RunConfig& cfg);

// Report serialization. Row names of the aggregate block are
// "Average Drop %", "Increase in Confidence", "Win %" and
// "Average Drop in Logit".
std::string FormatCsvReport(const std::vector<ConfidenceRecord>& records,
                            const MetricsReport& report);
std::string FormatJsonReport(const std::vector<ConfidenceRecord>& records,
                             const MetricsReport& report,
                             const std::vector<ImageFailure>& failures);

// Per-record rows of a CSV report, for independent re-aggregation.
std::vector<ConfidenceRecord> ParseCsvRecords(std::string_view text);

// Filename-safe form of a method label.
std::string SanitizeLabel(std::string_view label);

}  // namespace scorecam

#endif  // SCORECAM_PIPELINE_H_

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

#include "scorecam/pipeline.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>
#include <utility>

#include <json.hpp>

#include "scorecam/errors.h"
#include "scorecam/parallel.h"
#include "scorecam/render.h"
#include "scorecam/sequential_cnn.h"
#include "scorecam/weight_file.h"

namespace scorecam {
namespace {

namespace fs = std::filesystem;

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitList(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    std::string item = Trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

bool ParseSwitch(std::string_view key, std::string_view value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects on/off, got '" +
                    std::string(value) + "'");
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" +
                      std::string(value) + "'");
  }
  return out;
}

// Shortest representation that reads back to the same double.
std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> ParseCsvLine(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

bool IsImageFile(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".bmp";
}

constexpr const char* kCsvHeader =
    "image_id,method,class_c,y_full,o_masked,logit_full,logit_removed";

// Result of one image: records and artifacts in method order, or an error.
struct ImageResult {
  std::vector<ConfidenceRecord> records;
  std::vector<fs::path> written;
  std::optional<std::string> error;
};

std::vector<std::string> ImageIds(const std::vector<fs::path>& images) {
  std::vector<std::string> ids;
  std::map<std::string, int> seen;
  for (const fs::path& p : images) {
    std::string id = p.stem().string();
    if (id.empty()) id = "image";
    const int n = ++seen[id];
    if (n > 1) id += "-" + std::to_string(n);
    ids.push_back(std::move(id));
  }
  return ids;
}

}  // namespace

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format '" + std::string(name) +
                    "' (expected csv or json)");
}

RunOptions ParseConfigText(std::string_view text) {
  RunOptions o;
  for (const std::string& raw : SplitList(text, '\n')) {
    std::string line = raw.substr(0, raw.find('#'));
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line '" + line + "' is not key = value");
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (key == "model") o.model = value;
    else if (key == "images") for (auto& s : SplitList(value, ',')) o.images.push_back(s);
    else if (key == "method") o.methods.push_back(value);
    else if (key == "tap_layer") o.tap_layer = value;
    else if (key == "gating") o.gating = value;
    else if (key == "gate_aggregation") o.gate_aggregation = ParseSwitch(key, value);
    else if (key == "gate_normalizer") o.gate_normalizer = ParseSwitch(key, value);
    else if (key == "cic_softmax") o.cic_softmax = ParseSwitch(key, value);
    else if (key == "batch_size") o.batch_size = ParseNumber<std::size_t>(key, value);
    else if (key == "workers") o.workers = ParseNumber<std::size_t>(key, value);
    else if (key == "out") o.out = value;
    else if (key == "report_format") o.report_format = value;
    else if (key == "seed") o.seed = ParseNumber<std::uint64_t>(key, value);
    else if (key == "alpha") o.alpha = ParseNumber<double>(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return o;
}

RunOptions ReadConfigFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str());
}

RunOptions MergeOptions(const RunOptions& base, const RunOptions& overrides) {
  RunOptions o = base;
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(o.model, overrides.model);
  if (!overrides.images.empty()) o.images = overrides.images;
  if (!overrides.methods.empty()) o.methods = overrides.methods;
  take(o.tap_layer, overrides.tap_layer);
  take(o.gating, overrides.gating);
  take(o.gate_aggregation, overrides.gate_aggregation);
  take(o.gate_normalizer, overrides.gate_normalizer);
  take(o.cic_softmax, overrides.cic_softmax);
  take(o.batch_size, overrides.batch_size);
  take(o.workers, overrides.workers);
  take(o.out, overrides.out);
  take(o.report_format, overrides.report_format);
  take(o.seed, overrides.seed);
  take(o.alpha, overrides.alpha);
  return o;
}

CamConfig ParseMethodSpec(std::string_view spec, const CamConfig& defaults) {
  const auto colon = spec.find(':');
  const CamMethod method = ParseCamMethod(Trim(spec.substr(0, colon)));
  CamConfig cfg = CamConfig::ForMethod(method);
  cfg.gating = defaults.gating;
  cfg.cic_softmax = defaults.cic_softmax;
  cfg.mask_batch_size = defaults.mask_batch_size;
  cfg.workers = defaults.workers;
  cfg.target_class = defaults.target_class;
  cfg.gradient = defaults.gradient;
  if (method == CamMethod::kScoreCamPP) {
    cfg.gate_normalizer = defaults.gate_normalizer;
    cfg.gate_aggregation = defaults.gate_aggregation;
  }
  if (colon == std::string_view::npos) return cfg;
  for (const std::string& item : SplitList(spec.substr(colon + 1), ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("method option '" + item + "' is not key=value");
    }
    const std::string key = Trim(std::string_view(item).substr(0, eq));
    const std::string value = Trim(std::string_view(item).substr(eq + 1));
    if (key == "gating") cfg.gating = ParseGatingFunction(value);
    else if (key == "aggregation") cfg.gate_aggregation = ParseSwitch(key, value);
    else if (key == "normalizer") cfg.gate_normalizer = ParseSwitch(key, value);
    else if (key == "cic_softmax") cfg.cic_softmax = ParseSwitch(key, value);
    else if (key == "class") cfg.target_class = ParseNumber<std::size_t>(key, value);
    else throw ConfigError("unknown method option '" + key + "'");
  }
  if (method != CamMethod::kScoreCamPP && (cfg.gate_aggregation || cfg.gate_normalizer)) {
    throw ConfigError("gating switches only apply to scorecampp");
  }
  return cfg;
}

RunConfig ResolveRunConfig(const RunOptions& o) {
  RunConfig cfg;
  if (o.model) cfg.model_path = *o.model;
  for (const std::string& entry : o.images) {
    const fs::path p(entry);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && IsImageFile(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      cfg.images.insert(cfg.images.end(), found.begin(), found.end());
    } else {
      cfg.images.push_back(p);
    }
  }
  if (cfg.images.empty()) throw ConfigError("no input images given");

  if (o.tap_layer) cfg.tap_layer = *o.tap_layer;
  if (o.out) cfg.output_dir = *o.out;
  if (o.report_format) cfg.report_format = ParseReportFormat(*o.report_format);
  if (o.batch_size) cfg.mask_batch_size = *o.batch_size;
  if (cfg.mask_batch_size == 0) throw ConfigError("batch size must be positive");
  cfg.workers = o.workers.value_or(DefaultWorkerCount());
  if (cfg.workers == 0) throw ConfigError("workers must be positive");
  if (o.seed) cfg.seed = *o.seed;
  if (o.alpha) cfg.overlay_alpha = *o.alpha;
  if (!(cfg.overlay_alpha >= 0.0 && cfg.overlay_alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }

  CamConfig defaults = CamConfig::ForMethod(CamMethod::kScoreCamPP);
  if (o.gating) defaults.gating = ParseGatingFunction(*o.gating);
  if (o.gate_aggregation) defaults.gate_aggregation = *o.gate_aggregation;
  if (o.gate_normalizer) defaults.gate_normalizer = *o.gate_normalizer;
  if (o.cic_softmax) defaults.cic_softmax = *o.cic_softmax;
  defaults.mask_batch_size = cfg.mask_batch_size;
  defaults.workers = cfg.workers;
  for (const std::string& m : o.methods) cfg.methods.push_back(ParseMethodSpec(m, defaults));
  if (cfg.methods.empty()) throw ConfigError("at least one method is required");

  std::set<std::string> labels;
  for (const CamConfig& m : cfg.methods) {
    if (!labels.insert(m.Label()).second) {
      throw ConfigError("method '" + m.Label() + "' listed twice");
    }
  }
  return cfg;
}

std::string SanitizeLabel(std::string_view label) {
  std::string out;
  for (char c : label) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    if (keep) {
      out += c;
    } else if (c == '=') {
      out += '-';
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

PreprocessSpec PreprocessFor(const ClassifierBackend& backend) {
  const Shape& in = backend.capabilities().input_shape;
  if (in.size() != 3 || in[0] != 3) {
    throw ConfigError("backend input " + ShapeToString(in) + " is not 3 x H x W");
  }
  PreprocessSpec spec;
  spec.resize_h = in[1];
  spec.resize_w = in[2];
  return spec;
}

std::unique_ptr<ClassifierBackend> LoadBackend(const RunConfig& cfg) {
  if (cfg.model_path.empty()) {
    return std::make_unique<SequentialCnn>(GenerateReference(cfg.seed));
  }
  return std::make_unique<SequentialCnn>(LoadWeights(cfg.model_path));
}

MethodOutcome EvaluateMethod(const ClassifierBackend& backend, const Tensor& x,
                             std::string_view layer, const CamConfig& cfg,
                             std::string image_id) {
  MethodOutcome out;
  out.explanation = Explain(backend, x, layer, cfg);
  const std::size_t c = out.explanation.class_index;
  const Prediction masked = Forward(backend, MaskedInput(x, out.explanation.map));
  const Prediction removed = Forward(backend, RemovedInput(x, out.explanation.map));
  ConfidenceRecord& r = out.record;
  r.image_id = std::move(image_id);
  r.method = cfg.Label();
  r.class_index = c;
  r.y_full = out.explanation.prediction.probs[c];
  r.o_masked = masked.probs[c];
  r.logit_full = out.explanation.prediction.logits[c];
  r.logit_removed = removed.logits[c];
  return out;
}

BatchResult RunBatch(const RunConfig& cfg, const ClassifierBackend& backend) {
  if (cfg.images.empty()) throw ConfigError("no input images given");
  if (cfg.methods.empty()) throw ConfigError("at least one method is required");
  const std::string layer =
      cfg.tap_layer.empty() ? backend.capabilities().tap_layers.at(0) : cfg.tap_layer;
  if (!backend.capabilities().HasTapLayer(layer)) {
    throw ConfigError("unknown tap layer '" + layer + "'");
  }
  const PreprocessSpec prep = PreprocessFor(backend);
  fs::create_directories(cfg.output_dir);

  const std::vector<std::string> ids = ImageIds(cfg.images);
  const std::size_t n = cfg.images.size();
  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  // Spread workers over images first, then over each image's masks.
  const std::size_t image_workers = std::min(workers, n);
  const std::size_t mask_workers = std::max<std::size_t>(1, workers / image_workers);

  std::vector<ImageResult> results(n);
  ParallelFor(n, image_workers, [&](std::size_t i) {
    ImageResult& res = results[i];
    try {
      const Image original = ReadImage(cfg.images[i]);
      const Tensor x = Preprocess(original, prep);
      for (CamConfig method : cfg.methods) {
        method.workers = mask_workers;
        method.mask_batch_size = cfg.mask_batch_size;
        MethodOutcome outcome = EvaluateMethod(backend, x, layer, method, ids[i]);
        const std::string stem = ids[i] + "__" + SanitizeLabel(method.Label());
        const fs::path saliency = cfg.output_dir / (stem + "_saliency.png");
        const fs::path overlay = cfg.output_dir / (stem + "_overlay.png");
        WritePng(saliency, RenderHeatmap(outcome.explanation.map.normalized_full));
        WriteOverlay(overlay, original, outcome.explanation.map, cfg.overlay_alpha);
        res.written.push_back(saliency);
        res.written.push_back(overlay);
        res.records.push_back(std::move(outcome.record));
      }
    } catch (const std::exception& e) {
      res.error = e.what();
      res.records.clear();
    }
  });

  BatchResult out;
  for (std::size_t i = 0; i < n; ++i) {
    ImageResult& res = results[i];
    out.written.insert(out.written.end(), res.written.begin(), res.written.end());
    if (res.error) {
      out.failures.push_back({ids[i], *res.error});
      continue;
    }
    out.records.insert(out.records.end(), res.records.begin(), res.records.end());
  }
  if (out.records.empty()) {
    std::string msg = "all images failed";
    for (const ImageFailure& f : out.failures) msg += "\n  " + f.image_id + ": " + f.message;
    throw Error(msg);
  }
  out.report = Aggregate(out.records);

  const bool csv = cfg.report_format == ReportFormat::kCsv;
  const fs::path report_path = cfg.output_dir / (csv ? "report.csv" : "report.json");
  std::ofstream rep(report_path, std::ios::binary | std::ios::trunc);
  if (!rep) throw IoError("cannot write " + report_path.string());
  rep << (csv ? FormatCsvReport(out.records, out.report)
              : FormatJsonReport(out.records, out.report, out.failures));
  if (!rep) throw IoError("failed writing " + report_path.string());
  out.written.push_back(report_path);
  return out;
}

BatchResult RunBatch(const RunConfig& cfg) {
  std::unique_ptr<ClassifierBackend> backend = LoadBackend(cfg);
  return RunBatch(cfg, *backend);
}

std::string FormatCsvReport(const std::vector<ConfidenceRecord>& records,
                            const MetricsReport& report) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const ConfidenceRecord& r : records) {
    os << CsvField(r.image_id) << ',' << CsvField(r.method) << ',' << r.class_index
       << ',' << FormatDouble(r.y_full) << ',' << FormatDouble(r.o_masked) << ','
       << FormatDouble(r.logit_full) << ',' << FormatDouble(r.logit_removed) << '\n';
  }
  os << '\n' << "metric";
  for (const std::string& m : report.methods) os << ',' << CsvField(m);
  os << '\n' << "N";
  for (std::size_t i = 0; i < report.methods.size(); ++i) os << ',' << report.n;
  auto row = [&](const char* name, auto get) {
    os << '\n' << name;
    for (const std::string& m : report.methods) os << ',' << get(report.per_method.at(m));
  };
  row("Average Drop %", [](const MethodMetrics& m) { return FormatDouble(m.average_drop_pct); });
  row("Increase in Confidence",
      [](const MethodMetrics& m) { return FormatDouble(m.increase_in_confidence_pct); });
  row("Win %", [](const MethodMetrics& m) {
    return m.win_pct ? FormatDouble(*m.win_pct) : std::string();
  });
  row("Average Drop in Logit",
      [](const MethodMetrics& m) { return FormatDouble(m.avg_logit_drop); });
  os << '\n';
  return os.str();
}

std::string FormatJsonReport(const std::vector<ConfidenceRecord>& records,
                             const MetricsReport& report,
                             const std::vector<ImageFailure>& failures) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const ConfidenceRecord& r : records) {
    rows.push_back({{"image_id", r.image_id},
                    {"method", r.method},
                    {"class_c", r.class_index},
                    {"y_full", r.y_full},
                    {"o_masked", r.o_masked},
                    {"logit_full", r.logit_full},
                    {"logit_removed", r.logit_removed}});
  }
  j["records"] = std::move(rows);
  ordered_json methods = ordered_json::object();
  for (const std::string& m : report.methods) {
    const MethodMetrics& mm = report.per_method.at(m);
    ordered_json entry;
    entry["Average Drop %"] = mm.average_drop_pct;
    entry["Increase in Confidence"] = mm.increase_in_confidence_pct;
    entry["Win %"] = mm.win_pct ? ordered_json(*mm.win_pct) : ordered_json(nullptr);
    entry["Average Drop in Logit"] = mm.avg_logit_drop;
    methods[m] = std::move(entry);
  }
  j["aggregate"] = {{"N", report.n}, {"methods", std::move(methods)}};
  ordered_json fails = ordered_json::array();
  for (const ImageFailure& f : failures) {
    fails.push_back({{"image_id", f.image_id}, {"error", f.message}});
  }
  j["failures"] = std::move(fails);
  return j.dump(2) + "\n";
}

std::vector<ConfidenceRecord> ParseCsvRecords(std::string_view text) {
  std::vector<ConfidenceRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw FormatError("report does not start with the record header");
  }
  while (std::getline(in, line) && !line.empty()) {
    std::vector<std::string> f = ParseCsvLine(line);
    if (f.size() != 7) throw FormatError("report row has " + std::to_string(f.size()) + " fields");
    ConfidenceRecord r;
    r.image_id = f[0];
    r.method = f[1];
    r.class_index = ParseNumber<std::size_t>("class_c", f[2]);
    r.y_full = ParseNumber<double>("y_full", f[3]);
    r.o_masked = ParseNumber<double>("o_masked", f[4]);
    r.logit_full = ParseNumber<double>("logit_full", f[5]);
    r.logit_removed = ParseNumber<double>("logit_removed", f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace scorecam

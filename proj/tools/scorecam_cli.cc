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

// Command-line front end: explain, bench and gen-model.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scorecam/cam.h"
#include "scorecam/errors.h"
#include "scorecam/pipeline.h"
#include "scorecam/render.h"
#include "scorecam/sequential_cnn.h"
#include "scorecam/weight_file.h"

namespace {

namespace fs = std::filesystem;
using scorecam::RunOptions;

// Flags shared by explain and bench. Values stay unset unless given so that
// config-file entries are only overridden explicitly.
void AddRunFlags(CLI::App* cmd, RunOptions& o, std::string& config_path) {
  cmd->add_option("--config", config_path, "Flat key = value config file");
  cmd->add_option("--model", o.model, "Weight file (default: reference CNN from --seed)");
  cmd->add_option("--images", o.images, "Image files or directories (PNG/BMP)");
  cmd->add_option("--method", o.methods,
                  "gradcam | scorecam | scorecampp[:key=value,...]; repeatable");
  cmd->add_option("--tap-layer", o.tap_layer, "Layer whose activations are used");
  cmd->add_option("--gating", o.gating, "tanh | relu | sigmoid | swish | mish");
  cmd->add_flag_callback("--no-gate-aggregation", [&o] { o.gate_aggregation = false; },
                         "Use plain activations in the weighted sum");
  cmd->add_flag_callback("--no-gate-normalizer", [&o] { o.gate_normalizer = false; },
                         "Use min-max mask normalization");
  cmd->add_flag_callback("--cic-softmax", [&o] { o.cic_softmax = true; },
                         "Softmax the channel scores before aggregation");
  cmd->add_option("--batch-size", o.batch_size, "Masked inputs per inference batch");
  cmd->add_option("--workers", o.workers, "Worker threads (default: all cores)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--report-format", o.report_format, "csv | json");
  cmd->add_option("--seed", o.seed, "Seed of the generated reference CNN");
  cmd->add_option("--alpha", o.alpha, "Overlay opacity in [0, 1]");
}

scorecam::RunConfig Resolve(const RunOptions& cli, const std::string& config_path) {
  RunOptions merged = cli;
  if (!config_path.empty()) {
    merged = scorecam::MergeOptions(scorecam::ReadConfigFile(config_path), cli);
  }
  return scorecam::ResolveRunConfig(merged);
}

int RunExplain(const RunOptions& cli, const std::string& config_path) {
  scorecam::RunConfig cfg = Resolve(cli, config_path);
  if (cfg.images.size() != 1 || cfg.methods.size() != 1) {
    std::cerr << "explain takes exactly one image and one method\n";
    return 2;
  }
  auto backend = scorecam::LoadBackend(cfg);
  const std::string layer = cfg.tap_layer.empty()
                                ? backend->capabilities().tap_layers.at(0)
                                : cfg.tap_layer;
  const scorecam::Image original = scorecam::ReadImage(cfg.images[0]);
  const scorecam::Tensor x =
      scorecam::Preprocess(original, scorecam::PreprocessFor(*backend));
  const std::string id = cfg.images[0].stem().string();
  scorecam::MethodOutcome outcome =
      scorecam::EvaluateMethod(*backend, x, layer, cfg.methods[0], id);

  fs::create_directories(cfg.output_dir);
  const std::string stem = id + "__" + scorecam::SanitizeLabel(cfg.methods[0].Label());
  const fs::path saliency = cfg.output_dir / (stem + "_saliency.png");
  const fs::path overlay = cfg.output_dir / (stem + "_overlay.png");
  scorecam::WritePng(saliency,
                     scorecam::RenderHeatmap(outcome.explanation.map.normalized_full));
  scorecam::WriteOverlay(overlay, original, outcome.explanation.map, cfg.overlay_alpha);

  const scorecam::ConfidenceRecord& r = outcome.record;
  std::printf("image %s  method %s  class %zu\n", r.image_id.c_str(), r.method.c_str(),
              r.class_index);
  std::printf("  y_full %.6f  o_masked %.6f  logit_full %.6f  logit_removed %.6f\n",
              r.y_full, r.o_masked, r.logit_full, r.logit_removed);
  std::printf("  wrote %s\n  wrote %s\n", saliency.c_str(), overlay.c_str());
  return 0;
}

int RunBench(const RunOptions& cli, const std::string& config_path) {
  scorecam::RunConfig cfg = Resolve(cli, config_path);
  scorecam::BatchResult result = scorecam::RunBatch(cfg);
  for (const std::string& m : result.report.methods) {
    const scorecam::MethodMetrics& mm = result.report.per_method.at(m);
    std::printf("%-40s AD %7.3f  IiC %7.3f  Win %7s  dLogit %9.4f\n", m.c_str(),
                mm.average_drop_pct, mm.increase_in_confidence_pct,
                mm.win_pct ? std::to_string(*mm.win_pct).substr(0, 6).c_str() : "-",
                mm.avg_logit_drop);
  }
  std::printf("report: %s\n", result.written.back().c_str());
  if (!result.failures.empty()) {
    std::fprintf(stderr, "%zu image(s) failed:\n", result.failures.size());
    for (const auto& f : result.failures) {
      std::fprintf(stderr, "  %s: %s\n", f.image_id.c_str(), f.message.c_str());
    }
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-free class activation maps (ScoreCAM / ScoreCAM++)"};
  app.require_subcommand(1);

  RunOptions explain_opts;
  std::string explain_config;
  CLI::App* explain = app.add_subcommand("explain", "Explain one image with one method");
  AddRunFlags(explain, explain_opts, explain_config);

  RunOptions bench_opts;
  std::string bench_config;
  CLI::App* bench = app.add_subcommand("bench", "Run methods over images and write a report");
  AddRunFlags(bench, bench_opts, bench_config);

  std::uint64_t gen_seed = 42;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-model", "Write the reference CNN weight file");
  gen->add_option("--seed", gen_seed, "PRNG seed");
  gen->add_option("--out", gen_out, "Output weight file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*explain) return RunExplain(explain_opts, explain_config);
    if (*bench) return RunBench(bench_opts, bench_config);
    if (*gen) {
      scorecam::ModelSpec spec = scorecam::ReferenceArchitecture();
      scorecam::FillParameters(spec, gen_seed);
      scorecam::SaveWeights(spec, gen_out);
      std::printf("wrote %s (seed %llu)\n", gen_out.c_str(),
                  static_cast<unsigned long long>(gen_seed));
      return 0;
    }
  } catch (const scorecam::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

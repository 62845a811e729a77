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

// Acceptance runner: prints one [PASS] or [FAIL] line per criterion and
// exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/naive_cam.h"
#include "scorecam/backend.h"
#include "scorecam/cam.h"
#include "scorecam/metrics.h"
#include "scorecam/numerics.h"
#include "scorecam/pipeline.h"
#include "scorecam/sequential_cnn.h"
#include "test_util.h"

namespace {

namespace fs = std::filesystem;
using namespace scorecam;
using Clock = std::chrono::steady_clock;

const fs::path kImages = fs::path(SCORECAM_DATA_DIR) / "images";

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("scorecam_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> DirContents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = ReadText(e.path());
  }
  return out;
}

std::size_t LeastLikely(const ClassifierBackend& net, const Tensor& x) {
  const std::vector<double> p = Forward(net, x).probs.values();
  return static_cast<std::size_t>(std::min_element(p.begin(), p.end()) - p.begin());
}

ConfidenceRecord Rec(std::string image, std::string method, double y, double o) {
  ConfidenceRecord r;
  r.image_id = std::move(image);
  r.method = std::move(method);
  r.y_full = y;
  r.o_masked = o;
  return r;
}

RunConfig BenchConfig(const fs::path& out, std::size_t workers) {
  RunOptions o;
  o.images = {kImages.string()};
  o.methods = {"gradcam", "scorecam", "scorecampp"};
  o.out = out.string();
  o.workers = workers;
  return ResolveRunConfig(o);
}

// ============================================================================
// Criteria
// ============================================================================

Outcome ReportSchema() {
  Outcome r;
  const fs::path out = FreshDir("schema");
  RunConfig cfg = BenchConfig(out, 1);
  BatchResult batch = RunBatch(cfg);
  const std::string csv = ReadText(out / "report.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  r.Check(line == "image_id,method,class_c,y_full,o_masked,logit_full,logit_removed",
          "csv record header");
  std::vector<std::string> metric_rows;
  bool in_aggregate = false;
  while (std::getline(lines, line)) {
    if (line.empty()) {
      in_aggregate = true;
      continue;
    }
    if (in_aggregate) metric_rows.push_back(line.substr(0, line.find(',')));
  }
  const std::vector<std::string> want{"metric", "N", "Average Drop %", "Increase in Confidence",
                                      "Win %", "Average Drop in Logit"};
  r.Check(metric_rows == want, "csv aggregate row names");

  const std::string json = FormatJsonReport(batch.records, batch.report, batch.failures);
  for (const char* key : {"\"Average Drop %\"", "\"Increase in Confidence\"", "\"Win %\"",
                          "\"Average Drop in Logit\"", "\"class_c\"", "\"y_full\"",
                          "\"o_masked\"", "\"logit_full\"", "\"logit_removed\""}) {
    r.Check(json.find(key) != std::string::npos, std::string("json key ") + key);
  }
  if (r.pass) r.detail = "CSV and JSON carry the four table metric names and record columns";
  return r;
}

Outcome OracleEquivalence() {
  Outcome r;
  const auto start = Clock::now();
  SequentialCnn net = GenerateReference(42);
  double worst = 0.0;
  std::size_t nonzero_maps = 0, compared = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Tensor x = testutil::SyntheticInput(s);
    const std::size_t classes[] = {ArgMax(Forward(net, x).probs), LeastLikely(net, x)};
    for (std::size_t c : classes) {
      for (bool plus : {false, true}) {
        const SaliencyMap m = plus ? ScoreCamPP(net, x, c, "pool2") : ScoreCam(net, x, c, "pool2");
        const oracle::CamOutput ref =
            oracle::ScoreCam(net.spec(), testutil::ToVolume(x), static_cast<int>(c), plus);
        worst = std::max({worst, testutil::MaxAbsDiff(m.raw.values(), ref.raw),
                          testutil::MaxAbsDiff(m.normalized_full.values(), ref.full)});
        nonzero_maps += m.raw.Max() > 0.0;
        ++compared;
      }
    }
  }
  const double secs = Seconds(start);
  r.Check(worst <= 1e-10, "max deviation " + Fmt("%.3g", worst));
  r.Check(nonzero_maps >= compared / 2, "too few non-trivial maps");
  r.Check(secs < 60.0, "runtime " + Fmt("%.1f s", secs));
  if (r.pass) {
    r.detail = "10 inputs x {predicted, least likely} x {scorecam, scorecampp}: max |diff| " +
               Fmt("%.2e", worst) + ", " + std::to_string(nonzero_maps) + "/" +
               std::to_string(compared) + " maps non-zero, " + Fmt("%.1f s", secs);
  }
  return r;
}

Outcome GradientCheck() {
  Outcome r;
  SequentialCnn net = GenerateReference(42);
  double worst = 0.0;
  const std::size_t inputs = 6;
  for (std::uint64_t s = 0; s < inputs; ++s) {
    const Tensor x = testutil::SyntheticInput(100 + s);
    const std::size_t c = s % 10;
    const Tensor a = AnalyticGradient(net, x, c, "pool2");
    const Tensor f = FiniteDifferenceGradient(net, x, c, "pool2");
    for (std::size_t i = 0; i < a.numel(); ++i) {
      const double scale = std::max({std::abs(a[i]), std::abs(f[i]), 1e-12});
      worst = std::max(worst, std::abs(a[i] - f[i]) / scale);
    }
    const Tensor ga = GradCam(net, x, c, "pool2", GradientMode::kAnalytic).raw;
    const Tensor gf = GradCam(net, x, c, "pool2", GradientMode::kFiniteDifference).raw;
    for (std::size_t i = 0; i < ga.numel(); ++i) {
      const double scale = std::max({std::abs(ga[i]), std::abs(gf[i]), 1e-12});
      if (ga[i] != 0.0 || gf[i] != 0.0) worst = std::max(worst, std::abs(ga[i] - gf[i]) / scale);
    }
  }
  r.Check(worst <= 1e-3, "max relative error " + Fmt("%.3g", worst));
  if (r.pass) {
    r.detail = std::to_string(inputs) + " inputs, gradients and GradCAM maps: max relative error " +
               Fmt("%.2e", worst);
  }
  return r;
}

Outcome EquationMicroCases() {
  Outcome r;
  const Tensor t = TanhMap(Tensor::Vector({1.0}));
  r.Check(std::abs(t[0] - 0.7615941559557649) <= 1e-12, "tanh(1)");
  r.Check(MinMaxNormalize(Tensor::Vector({1.0, 2.0, 3.0})) == Tensor::Vector({0.0, 0.5, 1.0}),
          "minmax([1,2,3])");

  SequentialCnn net = GenerateReference(42);
  const Tensor x = testutil::SyntheticInput(1);
  const CicWeights w = CicScores(net, x, 3, Tensor::Full({16, 64, 64}, 1.0), CamConfig{});
  r.Check(std::all_of(w.scores.begin(), w.scores.end(), [](double s) { return s == 0.0; }),
          "all-ones masks give zero CIC scores");
  const TappedPrediction tp = ForwardWithTap(net, x, "pool2");
  const SaliencyMap zero = AggregateSaliency(tp.stack.maps, w.scores, GatingFunction::kTanh, 64, 64);
  r.Check(zero.raw == Tensor::Zeros({16, 16}) && zero.normalized_full == Tensor::Zeros({64, 64}),
          "zero CIC scores give zero saliency");

  const double alpha[] = {1.0};
  const SaliencyMap hand = AggregateSaliency(Tensor({1, 1, 1}, {1.0}), alpha,
                                             GatingFunction::kTanh, 1, 1);
  r.Check(std::abs(hand.raw[0] - 0.7615941559557649) <= 1e-12, "K=1 gated hand case");
  const double neg[] = {-1.0};
  const SaliencyMap clamped = AggregateSaliency(Tensor({1, 1, 1}, {1.0}), neg,
                                                GatingFunction::kTanh, 1, 1);
  r.Check(clamped.raw[0] == 0.0, "K=1 hand case clamps negative sum");
  if (r.pass) {
    r.detail = "tanh(1), minmax([1,2,3]), all-ones mask wiring, K=1 gated case with ReLU";
  }
  return r;
}

Outcome MetricFidelity() {
  Outcome r;
  const std::vector<ConfidenceRecord> ad{Rec("a", "m", 0.8, 0.6), Rec("b", "m", 0.5, 0.9)};
  const double got = AverageDrop(ad);
  // 0.8 and 0.6 are not representable; the exact rational value of
  // ((0.8 - 0.6) / 0.8 + 0) * 100 / 2 over the stored doubles, correctly
  // rounded, is 12.500000000000004.
  r.Check(got == 12.500000000000004, "average_drop equals the exact binary64 result");
  r.Check(std::abs(got - 12.5) <= 4 * std::nextafter(12.5, 13.0) - 4 * 12.5,
          "average_drop within 4 ulp of 12.5");
  const std::vector<ConfidenceRecord> dyadic{Rec("a", "m", 0.5, 0.25), Rec("b", "m", 0.5, 0.75)};
  r.Check(AverageDrop(dyadic) == 25.0, "dyadic average_drop exact");
  r.Check(IncreaseInConfidence(std::vector{Rec("a", "m", 0.5, 0.5)}) == 0.0,
          "increase_in_confidence counts y == O as 0");
  r.Check(IncreaseInConfidence(std::vector{Rec("a", "m", 0.4, 0.6), Rec("b", "m", 0.9, 0.1)}) ==
              50.0,
          "increase_in_confidence 50");

  auto tie = WinPercentage(std::vector{Rec("a", "m1", 0.5, 0.25), Rec("a", "m2", 0.5, 0.25)});
  r.Check(tie["m1"] == 100.0 && tie["m2"] == 100.0, "tied drops share the win");
  auto three = WinPercentage(std::vector{
      Rec("a", "m1", 0.5, 0.5), Rec("a", "m2", 0.5, 0.25), Rec("a", "m3", 0.5, 0.375),
      Rec("b", "m1", 0.5, 0.25), Rec("b", "m2", 0.5, 0.375), Rec("b", "m3", 0.5, 0.625)});
  r.Check(three["m1"] == 50.0 && three["m2"] == 0.0 && three["m3"] == 50.0, "three-method wins");
  std::vector<ConfidenceRecord> no_tie;
  for (int i = 0; i < 7; ++i) {
    const std::string id = "img" + std::to_string(i);
    no_tie.push_back(Rec(id, "a", 0.5, i % 3 ? 0.25 : 0.125));
    no_tie.push_back(Rec(id, "b", 0.5, 0.1875));
  }
  auto w = WinPercentage(no_tie);
  r.Check(w["a"] + w["b"] == 100.0, "no-tie win percentages sum to 100");

  r.detail = "strict inequality, shared ties and no-tie sum hold exactly";
  r.notes.push_back(
      "average_drop([0.8->0.6, 0.5->0.9]) = " + Fmt("%.17g", got) +
      ": the literal 12.5 is not reachable from the binary64 inputs 0.8 and 0.6 "
      "(it is the exact rational result, 2 ulp above 12.5); the dyadic case "
      "[0.5->0.25, 0.5->0.75] gives exactly 25");
  return r;
}

Outcome AblationDistinctness() {
  Outcome r;
  SequentialCnn net = GenerateReference(42);
  const Tensor x = testutil::SyntheticInput(1);
  // The least likely class has positive CIC scores on this input, and the
  // tapped activations sit in (0, 2), away from gating saturation.
  const std::size_t c = LeastLikely(net, x);
  const TappedPrediction tp = ForwardWithTap(net, x, "pool2");
  std::vector<std::pair<std::string, SaliencyMap>> maps;
  for (GatingFunction g : {GatingFunction::kTanh, GatingFunction::kRelu, GatingFunction::kSigmoid,
                           GatingFunction::kSwish, GatingFunction::kMish}) {
    CamConfig cfg = CamConfig::ForMethod(CamMethod::kScoreCamPP);
    cfg.gating = g;
    maps.emplace_back(cfg.Label(), ScoreCamPP(net, x, c, "pool2", cfg));
  }
  for (int which = 0; which < 2; ++which) {
    CamConfig cfg = CamConfig::ForMethod(CamMethod::kScoreCamPP);
    (which == 0 ? cfg.gate_aggregation : cfg.gate_normalizer) = false;
    maps.emplace_back(cfg.Label(), ScoreCamPP(net, x, c, "pool2", cfg));
  }
  double smallest = 1e300;
  std::string closest;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t j = i + 1; j < maps.size(); ++j) {
      const double d = testutil::MaxAbsDiff(maps[i].second.normalized_full.values(),
                                            maps[j].second.normalized_full.values());
      if (d < smallest) {
        smallest = d;
        closest = maps[i].first + " vs " + maps[j].first;
      }
    }
  }
  r.Check(smallest > 1e-6, "closest pair " + closest + " at " + Fmt("%.3g", smallest));
  r.Check(tp.stack.maps.Max() < 2.0, "stack not in the non-saturated range");
  if (r.pass) {
    r.detail = std::to_string(maps.size()) + " settings, smallest pairwise Linf " +
               Fmt("%.2e", smallest) + " (" + closest + ")";
  }
  return r;
}

Outcome DirectionalSanity() {
  Outcome r;
  SequentialCnn net(testutil::SquareDetectorSpec());
  const Tensor x = testutil::SquareInput();
  const std::size_t c = ArgMax(Forward(net, x).probs);
  const SaliencyMap m = ScoreCamPP(net, x, c, "pool2");
  double inside = 0.0, total = 0.0;
  const std::size_t lo = testutil::kSquareLo, hi = lo + testutil::kSquareSize;
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      const double v = m.normalized_full.at(i, j);
      total += v;
      if (i >= lo && i < hi && j >= lo && j < hi) inside += v;
    }
  }
  const double frac = total > 0.0 ? inside / total : 0.0;
  r.Check(c == 0, "detector does not predict the square class");
  r.Check(frac >= 0.70, "mass inside square " + Fmt("%.4f", frac));
  if (r.pass) r.detail = "scorecampp mass inside the 8x8 square: " + Fmt("%.2f %%", 100 * frac);
  return r;
}

Outcome Determinism() {
  Outcome r;
  const fs::path a = FreshDir("det_w1"), b = FreshDir("det_w8"), c = FreshDir("det_rerun");
  RunBatch(BenchConfig(a, 1));
  RunBatch(BenchConfig(b, 8));
  RunBatch(BenchConfig(c, 1));
  const auto da = DirContents(a), db = DirContents(b), dc = DirContents(c);
  r.Check(da.at("report.csv") == db.at("report.csv"), "workers=1 vs workers=8 report bytes");
  r.Check(da == db, "workers=1 vs workers=8 PNG bytes");
  r.Check(da == dc, "rerun PNG and report bytes");
  if (r.pass) {
    r.detail = std::to_string(da.size()) + " files byte-identical across workers 1/8 and reruns";
  }
  return r;
}

Outcome EndToEndCensus() {
  Outcome r;
  const fs::path out = FreshDir("census");
  const std::string cmd = std::string(SCORECAM_CLI_PATH) + " bench --images " + kImages.string() +
                          " --method gradcam --method scorecam --method scorecampp --out " +
                          out.string() + " >/dev/null 2>&1";
  const auto start = Clock::now();
  const int status = std::system(cmd.c_str());
  const double secs = Seconds(start);
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::size_t pngs = 0, reports = 0, other = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    const std::string name = e.path().filename().string();
    if (e.path().extension() == ".png") ++pngs;
    else if (name == "report.csv" || name == "report.json") ++reports;
    else ++other;
  }
  r.Check(code == 0, "exit code " + std::to_string(code));
  r.Check(pngs == 18 && reports == 1 && other == 0,
          std::to_string(pngs) + " PNGs, " + std::to_string(reports) + " reports");
  r.Check(secs < 120.0, "runtime " + Fmt("%.1f s", secs));
  if (r.pass) r.detail = "exit 0, 18 PNGs + 1 report in " + Fmt("%.2f s", secs);
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"report schema", ReportSchema},
      {"oracle equivalence", OracleEquivalence},
      {"gradient check", GradientCheck},
      {"equation micro-cases", EquationMicroCases},
      {"metric fidelity", MetricFidelity},
      {"ablation switches", AblationDistinctness},
      {"directional sanity", DirectionalSanity},
      {"determinism and parallelism", Determinism},
      {"end-to-end census", EndToEndCensus},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    for (const std::string& n : o.notes) std::printf("       note: %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

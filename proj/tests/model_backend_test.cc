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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracle/naive_cam.h"
#include "scorecam/backend.h"
#include "scorecam/errors.h"
#include "scorecam/numerics.h"
#include "scorecam/sequential_cnn.h"
#include "scorecam/weight_file.h"
#include "test_util.h"

namespace scorecam {
namespace {

namespace fs = std::filesystem;

std::vector<double> ReadGolden(const std::string& name) {
  std::ifstream in(std::string(SCORECAM_GOLDEN_DIR) + "/" + name);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(std::stod(line));
  }
  return out;
}

fs::path TempPath(const std::string& name) {
  return fs::temp_directory_path() / ("scorecam_backend_" + name);
}

class ReferenceCnnTest : public ::testing::Test {
 protected:
  SequentialCnn net_ = GenerateReference(42);
};

// ============================================================================
// forward
// ============================================================================

TEST(ForwardTest, AllZeroWeightsGiveUniformProbabilities) {
  SequentialCnn zero(ReferenceArchitecture());
  Prediction p = Forward(zero, testutil::SyntheticInput(3));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(p.logits[i], 0.0);
    EXPECT_EQ(p.probs[i], 0.1);
  }
}

TEST_F(ReferenceCnnTest, DeterministicLogits) {
  Tensor x = testutil::SyntheticInput(5);
  EXPECT_EQ(Forward(net_, x).logits, Forward(net_, x).logits);
}

TEST_F(ReferenceCnnTest, MatchesGoldenLogits) {
  const std::vector<double> golden = ReadGolden("forward_seed42.txt");
  ASSERT_EQ(golden.size(), 10u);
  Prediction p = Forward(net_, testutil::SyntheticInput(1));
  for (std::size_t i = 0; i < golden.size(); ++i) EXPECT_NEAR(p.logits[i], golden[i], 1e-12);
  EXPECT_EQ(p.probs, Softmax(p.logits));
}

TEST_F(ReferenceCnnTest, MatchesScalarOracleOnSeveralInputs) {
  for (std::uint64_t s = 10; s < 14; ++s) {
    Tensor x = testutil::SyntheticInput(s);
    oracle::NetOutput ref = oracle::Run(net_.spec(), testutil::ToVolume(x));
    EXPECT_LT(testutil::MaxAbsDiff(Forward(net_, x).logits.values(), ref.logits), 1e-12);
  }
}

TEST_F(ReferenceCnnTest, RejectsWrongInputShape) {
  EXPECT_THROW(Forward(net_, Tensor::Zeros({3, 32, 32})), ShapeError);
  EXPECT_THROW(Forward(net_, Tensor::Zeros({1, 64, 64})), ShapeError);
}

TEST_F(ReferenceCnnTest, Capabilities) {
  const BackendCapabilities& caps = net_.capabilities();
  EXPECT_EQ(caps.input_shape, (Shape{3, 64, 64}));
  EXPECT_EQ(caps.num_classes, 10u);
  EXPECT_EQ(caps.tap_layers, (std::vector<std::string>{"pool2"}));
  EXPECT_TRUE(caps.supports_forward_from);
  EXPECT_TRUE(caps.supports_analytic_gradient);
}

// ============================================================================
// forward_with_tap
// ============================================================================

TEST_F(ReferenceCnnTest, TapIsTransparent) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Tensor x = testutil::SyntheticInput(s);
    TappedPrediction t = ForwardWithTap(net_, x, "pool2");
    Prediction p = Forward(net_, x);
    EXPECT_EQ(t.logits, p.logits);
    EXPECT_EQ(t.probs, p.probs);
  }
}

TEST_F(ReferenceCnnTest, TapShapeMatchesHeader) {
  TappedPrediction t = ForwardWithTap(net_, testutil::SyntheticInput(2), "pool2");
  EXPECT_EQ(t.stack.layer_id, "pool2");
  EXPECT_EQ(t.stack.maps.shape(), (Shape{16, 16, 16}));
  EXPECT_EQ(t.stack.maps.shape(), net_.LayerOutputShape("pool2"));
  EXPECT_GE(t.stack.maps.Min(), 0.0);  // post-ReLU activations
}

TEST(TapTest, ZeroInputZeroBiasGivesZeroStack) {
  SequentialCnn net = GenerateReference(42, /*zero_bias=*/true);
  TappedPrediction t = ForwardWithTap(net, Tensor::Zeros({3, 64, 64}), "pool2");
  EXPECT_EQ(t.stack.maps, Tensor::Zeros({16, 16, 16}));
}

TEST_F(ReferenceCnnTest, UnknownTapLayer) {
  EXPECT_THROW(ForwardWithTap(net_, testutil::SyntheticInput(0), "conv1"), ConfigError);
  EXPECT_THROW(ForwardWithTap(net_, testutil::SyntheticInput(0), "nope"), ConfigError);
}

// ============================================================================
// forward_from
// ============================================================================

TEST_F(ReferenceCnnTest, ResumeReproducesLogitsBitForBit) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Tensor x = testutil::SyntheticInput(s);
    TappedPrediction t = ForwardWithTap(net_, x, "pool2");
    EXPECT_EQ(ForwardFrom(net_, "pool2", t.stack), Forward(net_, x).logits);
  }
}

TEST(ForwardFromTest, ZeroStackZeroBiasGivesZeroLogits) {
  SequentialCnn net = GenerateReference(42, /*zero_bias=*/true);
  ActivationStack zero{"pool2", Tensor::Zeros({16, 16, 16})};
  EXPECT_EQ(ForwardFrom(net, "pool2", zero), Tensor::Zeros({10}));
}

TEST_F(ReferenceCnnTest, PerturbingOneActivationMovesLogits) {
  TappedPrediction t = ForwardWithTap(net_, testutil::SyntheticInput(4), "pool2");
  const Tensor base = ForwardFrom(net_, "pool2", t.stack);
  std::vector<double> v = t.stack.maps.values();
  v[123] += 0.5;
  const Tensor moved = ForwardFrom(net_, "pool2", {"pool2", Tensor(t.stack.maps.shape(), v)});
  EXPECT_GT(testutil::MaxAbsDiff(base.values(), moved.values()), 1e-6);
}

TEST_F(ReferenceCnnTest, ForwardFromRejectsWrongStackShape) {
  EXPECT_THROW(ForwardFrom(net_, "pool2", {"pool2", Tensor::Zeros({16, 8, 8})}), ShapeError);
}

class NoResumeBackend : public ClassifierBackend {
 public:
  NoResumeBackend() {
    caps_.input_shape = {1, 2, 2};
    caps_.num_classes = 2;
    caps_.tap_layers = {"features"};
  }
  const BackendCapabilities& capabilities() const override { return caps_; }
  Tensor Logits(const Tensor& x) const override {
    return Tensor::Vector({x.Sum(), -x.Sum()});
  }
  Tensor LogitsWithTap(const Tensor& x, std::string_view layer,
                       ActivationStack* stack) const override {
    if (stack) *stack = {std::string(layer), x};
    return Logits(x);
  }

 private:
  BackendCapabilities caps_;
};

TEST(ForwardFromTest, CapabilityAbsent) {
  NoResumeBackend backend;
  ActivationStack s{"features", Tensor::Zeros({1, 2, 2})};
  EXPECT_THROW(ForwardFrom(backend, "features", s), CapabilityError);
  EXPECT_THROW(AnalyticGradient(backend, Tensor::Zeros({1, 2, 2}), 0, "features"),
               CapabilityError);
}

// ============================================================================
// Weight files
// ============================================================================

TEST(WeightFileTest, GenerationIsDeterministic) {
  ModelSpec a = ReferenceArchitecture();
  ModelSpec b = ReferenceArchitecture();
  FillParameters(a, 42);
  FillParameters(b, 42);
  EXPECT_EQ(EncodeWeights(a), EncodeWeights(b));
  ModelSpec c = ReferenceArchitecture();
  FillParameters(c, 43);
  EXPECT_NE(EncodeWeights(a), EncodeWeights(c));
}

TEST(WeightFileTest, ParametersAreBoundedAndFloatExact) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, 42);
  for (const LayerSpec& L : spec.layers) {
    for (double w : L.weight) {
      EXPECT_LE(std::abs(w), 0.1);
      EXPECT_EQ(static_cast<double>(static_cast<float>(w)), w);
    }
  }
}

TEST(WeightFileTest, LayoutStartsWithMagicAndHeader) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, 1);
  std::vector<std::uint8_t> bytes = EncodeWeights(spec);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CSW1");
  const std::uint32_t n = bytes[4] | (bytes[5] << 8) | (bytes[6] << 16) |
                          (static_cast<std::uint32_t>(bytes[7]) << 24);
  const std::string header(bytes.begin() + 8, bytes.begin() + 8 + n);
  EXPECT_NE(header.find("\"tap_layer\":\"pool2\""), std::string::npos);
  EXPECT_NE(header.find("\"format_version\":1"), std::string::npos);
  std::size_t floats = 0;
  for (const LayerSpec& L : spec.layers) floats += L.weight.size() + L.bias.size();
  EXPECT_EQ(bytes.size(), 8 + n + 4 * floats);
}

TEST(WeightFileTest, SaveLoadRoundTripPreservesOutputs) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, 7);
  const fs::path path = TempPath("roundtrip.csw");
  SaveWeights(spec, path);
  SequentialCnn loaded = LoadWeights(path);
  SequentialCnn original(spec);
  for (std::uint64_t s = 0; s < 3; ++s) {
    Tensor x = testutil::SyntheticInput(s);
    EXPECT_EQ(Forward(loaded, x).logits, Forward(original, x).logits);
  }
  EXPECT_EQ(loaded.spec().seed, 7u);
  fs::remove(path);
}

TEST(WeightFileTest, TruncatedPayloadNamesLayer) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, 7);
  std::vector<std::uint8_t> bytes = EncodeWeights(spec);
  bytes.resize(bytes.size() - 4);
  try {
    DecodeWeights(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 'fc'"), std::string::npos) << e.what();
  }
}

TEST(WeightFileTest, RejectsBadMagicVersionAndTrailingBytes) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, 7);
  std::vector<std::uint8_t> bytes = EncodeWeights(spec);

  std::vector<std::uint8_t> magic = bytes;
  magic[3] = '2';
  EXPECT_THROW(DecodeWeights(magic), FormatError);

  std::vector<std::uint8_t> trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(DecodeWeights(trailing), FormatError);

  std::string text(bytes.begin(), bytes.end());
  const auto pos = text.find("\"format_version\":1");
  ASSERT_NE(pos, std::string::npos);
  std::vector<std::uint8_t> version = bytes;
  version[pos + std::string("\"format_version\":").size()] = '9';
  try {
    DecodeWeights(version);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  std::vector<std::uint8_t> garbage = bytes;
  garbage[8] = '!';
  EXPECT_THROW(DecodeWeights(garbage), FormatError);
}

TEST(WeightFileTest, ModelValidation) {
  ModelSpec spec = ReferenceArchitecture();
  spec.tap_layer = "fc";
  EXPECT_THROW(SequentialCnn{spec}, FormatError);
  spec = ReferenceArchitecture();
  spec.tap_layer = "pool1";  // precedes the last convolution
  EXPECT_THROW(SequentialCnn{spec}, FormatError);
  spec = ReferenceArchitecture();
  spec.layers[0].weight.pop_back();
  EXPECT_THROW(SequentialCnn{spec}, FormatError);
}

// ============================================================================
// analytic_gradient
// ============================================================================

TEST_F(ReferenceCnnTest, DenseSuffixGradientIsWeightRow) {
  const std::size_t c = 3;
  Tensor g = AnalyticGradient(net_, testutil::SyntheticInput(0), c, "pool2");
  const LayerSpec& fc = net_.spec().layers.back();
  ASSERT_EQ(g.shape(), (Shape{16, 16, 16}));
  for (std::size_t i = 0; i < g.numel(); ++i) {
    EXPECT_EQ(g[i], fc.weight[c * fc.in_features + i]);
  }
}

TEST_F(ReferenceCnnTest, GradientMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Tensor x = testutil::SyntheticInput(s);
    Tensor a = AnalyticGradient(net_, x, 2, "pool2");
    Tensor f = FiniteDifferenceGradient(net_, x, 2, "pool2");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
      worst = std::max(worst, std::abs(a[i] - f[i]) / std::max(1e-8, std::abs(a[i])));
    }
    EXPECT_LT(worst, 1e-3);
  }
}

TEST(GradientTest, ZeroSuffixWeightsGiveZeroGradient) {
  ModelSpec spec = ReferenceArchitecture();
  FillParameters(spec, 42);
  std::fill(spec.layers.back().weight.begin(), spec.layers.back().weight.end(), 0.0);
  SequentialCnn net(spec);
  EXPECT_EQ(AnalyticGradient(net, testutil::SyntheticInput(1), 0, "pool2"),
            Tensor::Zeros({16, 16, 16}));
}

// Smaller input so the finite-difference sweep is cheap; the gradient runs
// through the full backward chain of the dense suffix.
TEST(GradientTest, SmallInputMatchesFiniteDifferences) {
  ModelSpec spec = ReferenceArchitecture({3, 16, 16}, 4);
  FillParameters(spec, 11);
  SequentialCnn net(spec);
  Tensor x = testutil::SyntheticInput(9, {3, 16, 16});
  Tensor a = AnalyticGradient(net, x, 1, "pool2");
  Tensor f = FiniteDifferenceGradient(net, x, 1, "pool2");
  EXPECT_LT(testutil::MaxAbsDiff(a.values(), f.values()), 1e-6);
}

TEST(GradientTest, ClassOutOfRange) {
  SequentialCnn net = GenerateReference(1);
  EXPECT_THROW(AnalyticGradient(net, testutil::SyntheticInput(0), 10, "pool2"), ConfigError);
}

}  // namespace
}  // namespace scorecam

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

#include "scorecam/render.h"

#include <algorithm>
#include <cmath>

#include "scorecam/errors.h"
#include "scorecam/numerics.h"

namespace scorecam {
namespace {

constexpr std::array<std::array<double, 3>, 5> kControlPoints = {{
    {0.0, 0.0, 255.0},
    {0.0, 255.0, 255.0},
    {0.0, 255.0, 0.0},
    {255.0, 255.0, 0.0},
    {255.0, 0.0, 0.0},
}};

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

Rgb Colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const auto seg = std::min<std::size_t>(static_cast<std::size_t>(pos), 3);
  const double f = pos - static_cast<double>(seg);
  const auto& a = kControlPoints[seg];
  const auto& b = kControlPoints[seg + 1];
  Rgb out;
  for (std::size_t c = 0; c < 3; ++c) out[c] = ToByte(a[c] + f * (b[c] - a[c]));
  return out;
}

Image RenderHeatmap(const Tensor& normalized) {
  if (normalized.rank() != 2) throw ShapeError("heatmap expects a rank-2 map");
  Image out(normalized.dim(1), normalized.dim(0));
  for (std::size_t i = 0; i < normalized.numel(); ++i) {
    Rgb c = Colormap(normalized[i]);
    std::copy(c.begin(), c.end(), out.rgb.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  return out;
}

Image RenderOverlay(const Image& original, const SaliencyMap& map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("overlay alpha must lie in [0, 1]");
  }
  if (original.width == 0 || original.height == 0) {
    throw FormatError("cannot overlay onto an empty image");
  }
  const Tensor& m = map.normalized_full;
  if (m.rank() != 2) throw ShapeError("saliency map must be rank 2");
  Tensor resized = (m.dim(0) == original.height && m.dim(1) == original.width)
                       ? m
                       : BilinearUpsample(m, original.height, original.width);
  Image out = original;
  for (std::size_t i = 0; i < resized.numel(); ++i) {
    Rgb c = Colormap(resized[i]);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const double base = original.rgb[i * 3 + ch];
      out.rgb[i * 3 + ch] = ToByte((1.0 - alpha) * base + alpha * c[ch]);
    }
  }
  return out;
}

void WriteOverlay(const std::filesystem::path& path, const Image& original,
                  const SaliencyMap& map, double alpha) {
  WritePng(path, RenderOverlay(original, map, alpha));
}

}  // namespace scorecam

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

#ifndef SCORECAM_RENDER_H_
#define SCORECAM_RENDER_H_

#include <array>
#include <cstdint>
#include <filesystem>

#include "scorecam/cam.h"
#include "scorecam/image.h"
#include "scorecam/tensor.h"

namespace scorecam {

using Rgb = std::array<std::uint8_t, 3>;

// Piecewise-linear colormap through five evenly spaced control points:
//   0.00 blue (0,0,255)   0.25 cyan (0,255,255)   0.50 green (0,255,0)
//   0.75 yellow (255,255,0)   1.00 red (255,0,0)
// Inputs are clamped to [0, 1]; channels are rounded half away from zero.
Rgb Colormap(double t);

// Colormapped rendering of a map with values in [0, 1].
Image RenderHeatmap(const Tensor& normalized);

// normalized_full resized to the original's size, colormapped, and blended
// as round((1 - alpha) * original + alpha * color). alpha must be in [0, 1].
Image RenderOverlay(const Image& original, const SaliencyMap& map, double alpha);

void WriteOverlay(const std::filesystem::path& path, const Image& original,
                  const SaliencyMap& map, double alpha);

}  // namespace scorecam

#endif  // SCORECAM_RENDER_H_

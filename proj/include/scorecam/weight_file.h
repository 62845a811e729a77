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

#ifndef SCORECAM_WEIGHT_FILE_H_
#define SCORECAM_WEIGHT_FILE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scorecam/sequential_cnn.h"

namespace scorecam {

// Weight file layout, all integers little-endian:
//
//   offset 0   4 bytes   magic "CSW1"
//   offset 4   u32       header length n in bytes
//   offset 8   n bytes   UTF-8 JSON header
//   offset 8+n           f32 payload, every parameter tensor in layer order,
//                        weight before bias, row-major
//
// The header carries format_version (currently 1), seed, input_shape,
// num_classes, tap_layer, payload_floats and the layer list. Each layer has
// "name" and "type" plus its geometry keys and, for conv/dense, a "params"
// object mapping "weight"/"bias" to shapes.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

std::vector<std::uint8_t> EncodeWeights(const ModelSpec& spec);
ModelSpec DecodeWeights(std::span<const std::uint8_t> bytes);

void SaveWeights(const ModelSpec& spec, const std::filesystem::path& path);
ModelSpec ReadWeightFile(const std::filesystem::path& path);
SequentialCnn LoadWeights(const std::filesystem::path& path);

}  // namespace scorecam

#endif  // SCORECAM_WEIGHT_FILE_H_

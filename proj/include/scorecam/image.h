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

#ifndef SCORECAM_IMAGE_H_
#define SCORECAM_IMAGE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scorecam/tensor.h"

namespace scorecam {

// 8-bit interleaved RGB image, row-major, top row first.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(std::size_t w, std::size_t h);
  std::uint8_t* pixel(std::size_t x, std::size_t y) { return &rgb[(y * width + x) * 3]; }
  const std::uint8_t* pixel(std::size_t x, std::size_t y) const {
    return &rgb[(y * width + x) * 3];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

// Decodes PNG (any bit depth or color type, flattened to RGB) or
// uncompressed 24/32-bit BMP, chosen by the file signature.
Image DecodeImage(std::span<const std::uint8_t> bytes);
Image ReadImage(const std::filesystem::path& path);

// Deterministic PNG encoding: 8-bit RGB, no ancillary chunks.
std::vector<std::uint8_t> EncodePng(const Image& image);
void WritePng(const std::filesystem::path& path, const Image& image);

struct PreprocessSpec {
  std::size_t resize_h = 224;
  std::size_t resize_w = 224;
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
};

// Bilinear resize (half-pixel centers), scale by 1/255, then (x - mean) / std
// per channel. Returns 3 x resize_h x resize_w.
Tensor Preprocess(const Image& image, const PreprocessSpec& spec);

// Bilinear resize of an RGB image with the same sampling as Preprocess.
Image ResizeImage(const Image& image, std::size_t out_w, std::size_t out_h);

}  // namespace scorecam

#endif  // SCORECAM_IMAGE_H_

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

#include "scorecam/image.h"

#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>

#include "scorecam/errors.h"
#include "scorecam/numerics.h"

namespace scorecam {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::uint32_t Le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t Le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

Image DecodePng(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw FormatError(std::string("undecodable PNG: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw FormatError("image has a zero dimension");
  }
  Image out(img.width, img.height);
  // Transparent pixels are composited over black.
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&img, &black, out.rgb.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("undecodable PNG: " + msg);
  }
  return out;
}

Image DecodeBmp(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 54) throw FormatError("truncated BMP header");
  const std::uint32_t offset = Le32(&bytes[10]);
  const std::uint32_t info_size = Le32(&bytes[14]);
  if (info_size < 40) throw FormatError("unsupported BMP info header");
  const auto raw_w = static_cast<std::int32_t>(Le32(&bytes[18]));
  const auto raw_h = static_cast<std::int32_t>(Le32(&bytes[22]));
  const std::uint16_t bpp = Le16(&bytes[28]);
  const std::uint32_t compression = Le32(&bytes[30]);
  if (raw_w <= 0 || raw_h == 0) throw FormatError("image has a zero dimension");
  if ((bpp != 24 && bpp != 32) || (compression != 0 && compression != 3)) {
    throw FormatError("only uncompressed 24/32-bit BMP is supported");
  }
  const bool bottom_up = raw_h > 0;
  const auto w = static_cast<std::size_t>(raw_w);
  const auto h = static_cast<std::size_t>(bottom_up ? raw_h : -raw_h);
  const std::size_t bytes_pp = bpp / 8;
  const std::size_t stride = (w * bytes_pp + 3) / 4 * 4;
  if (offset > bytes.size() || bytes.size() - offset < stride * h) {
    throw FormatError("truncated BMP pixel data");
  }
  Image out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t src_row = bottom_up ? h - 1 - y : y;
    const std::uint8_t* row = bytes.data() + offset + src_row * stride;
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint8_t* bgr = row + x * bytes_pp;
      std::uint8_t* dst = out.pixel(x, y);
      dst[0] = bgr[2];
      dst[1] = bgr[1];
      dst[2] = bgr[0];
    }
  }
  return out;
}

}  // namespace

Image::Image(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

Image DecodeImage(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    return DecodePng(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') {
    return DecodeBmp(bytes);
  }
  throw FormatError("unrecognized image format (expected PNG or BMP)");
}

Image ReadImage(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return DecodeImage(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> EncodePng(const Image& image) {
  if (image.width == 0 || image.height == 0 ||
      image.rgb.size() != image.width * image.height * 3) {
    throw FormatError("cannot encode an empty or inconsistent image");
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.rgb.data(), 0,
                                 nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

void WritePng(const std::filesystem::path& path, const Image& image) {
  const std::vector<std::uint8_t> bytes = EncodePng(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

// One channel of an RGB image as an h x w map of raw 0..255 values.
Tensor ChannelPlane(const Image& image, std::size_t c) {
  std::vector<double> v(image.width * image.height);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = image.rgb[i * 3 + c];
  return Tensor({image.height, image.width}, std::move(v));
}

}  // namespace

Tensor Preprocess(const Image& image, const PreprocessSpec& spec) {
  if (image.width == 0 || image.height == 0) {
    throw FormatError("image has a zero dimension");
  }
  for (double s : spec.std) {
    if (!(s > 0.0)) throw ConfigError("preprocess std components must be > 0");
  }
  const std::size_t plane = spec.resize_h * spec.resize_w;
  std::vector<double> out(3 * plane);
  for (std::size_t c = 0; c < 3; ++c) {
    Tensor resized = BilinearUpsample(ChannelPlane(image, c), spec.resize_h,
                                      spec.resize_w);
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = (resized[p] / 255.0 - spec.mean[c]) / spec.std[c];
    }
  }
  return Tensor({3, spec.resize_h, spec.resize_w}, std::move(out));
}

Image ResizeImage(const Image& image, std::size_t out_w, std::size_t out_h) {
  if (out_w == image.width && out_h == image.height) return image;
  Image out(out_w, out_h);
  for (std::size_t c = 0; c < 3; ++c) {
    Tensor resized = BilinearUpsample(ChannelPlane(image, c), out_h, out_w);
    for (std::size_t p = 0; p < out_w * out_h; ++p) {
      out.rgb[p * 3 + c] = static_cast<std::uint8_t>(std::lround(resized[p]));
    }
  }
  return out;
}

}  // namespace scorecam

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

#include "scorecam/weight_file.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>

#include <json.hpp>

#include "scorecam/errors.h"

namespace scorecam {
namespace {

using nlohmann::ordered_json;

constexpr char kMagic[4] = {'C', 'S', 'W', '1'};

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutFloats(std::vector<std::uint8_t>& out, const std::vector<double>& values) {
  for (double v : values) PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

ordered_json ShapeJson(const Shape& shape) {
  ordered_json arr = ordered_json::array();
  for (std::size_t d : shape) arr.push_back(d);
  return arr;
}

Shape ShapeFromJson(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + " must be an array");
  Shape shape;
  for (const auto& d : j) {
    if (!d.is_number_unsigned()) throw FormatError(what + " must hold unsigned extents");
    shape.push_back(d.get<std::size_t>());
  }
  return shape;
}

std::size_t PayloadFloats(const ModelSpec& spec) {
  std::size_t n = 0;
  for (const LayerSpec& L : spec.layers) n += L.weight.size() + L.bias.size();
  return n;
}

ordered_json HeaderJson(const ModelSpec& spec) {
  ordered_json h;
  h["format_version"] = kWeightFormatVersion;
  h["seed"] = spec.seed;
  h["input_shape"] = ShapeJson(spec.input_shape);
  h["num_classes"] = spec.num_classes;
  h["tap_layer"] = spec.tap_layer;
  h["payload_floats"] = PayloadFloats(spec);
  ordered_json layers = ordered_json::array();
  for (const LayerSpec& L : spec.layers) {
    ordered_json j;
    j["name"] = L.name;
    j["type"] = LayerTypeName(L.type);
    switch (L.type) {
      case LayerType::kConv:
        j["in_channels"] = L.in_channels;
        j["out_channels"] = L.out_channels;
        j["kernel"] = L.kernel;
        j["padding"] = L.padding;
        break;
      case LayerType::kMaxPool:
        j["pool"] = L.pool;
        break;
      case LayerType::kDense:
        j["in_features"] = L.in_features;
        j["out_features"] = L.out_features;
        break;
      case LayerType::kRelu:
        break;
    }
    if (L.type == LayerType::kConv || L.type == LayerType::kDense) {
      j["params"] = {{"weight", ShapeJson(L.WeightShape())},
                     {"bias", ShapeJson(L.BiasShape())}};
    }
    layers.push_back(std::move(j));
  }
  h["layers"] = std::move(layers);
  return h;
}

std::size_t GetCount(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw FormatError(where + ": missing or invalid '" + key + "'");
  }
  return j[key].get<std::size_t>();
}

// Reads `count` floats for parameter `what` of layer `layer`.
std::vector<double> TakeFloats(const std::uint8_t*& cursor, const std::uint8_t* end,
                               std::size_t count, const std::string& layer,
                               const char* what) {
  const auto available = static_cast<std::size_t>(end - cursor) / 4;
  if (available < count) {
    throw FormatError("truncated payload in layer '" + layer + "': " + what +
                      " needs " + std::to_string(count) + " floats, " +
                      std::to_string(available) + " remain");
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i, cursor += 4) {
    out[i] = static_cast<double>(std::bit_cast<float>(GetU32(cursor)));
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> EncodeWeights(const ModelSpec& spec) {
  const std::string header = HeaderJson(spec).dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  PutU32(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  for (const LayerSpec& L : spec.layers) {
    PutFloats(out, L.weight);
    PutFloats(out, L.bias);
  }
  return out;
}

ModelSpec DecodeWeights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a weight file: bad magic");
  }
  const std::uint32_t header_len = GetU32(bytes.data() + 4);
  if (bytes.size() - 8 < header_len) {
    throw FormatError("weight file header is truncated");
  }
  const auto* header_begin = reinterpret_cast<const char*>(bytes.data() + 8);
  ordered_json h;
  try {
    h = ordered_json::parse(header_begin, header_begin + header_len);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed weight header: ") + e.what());
  }
  if (!h.is_object()) throw FormatError("malformed weight header: not an object");

  const std::size_t version = GetCount(h, "format_version", "header");
  if (version != kWeightFormatVersion) {
    throw FormatError("unsupported weight format version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kWeightFormatVersion) + ")");
  }
  ModelSpec spec;
  if (!h.contains("seed") || !h["seed"].is_number_unsigned()) {
    throw FormatError("header: missing or invalid 'seed'");
  }
  spec.seed = h["seed"].get<std::uint64_t>();
  if (!h.contains("input_shape")) throw FormatError("header: missing 'input_shape'");
  spec.input_shape = ShapeFromJson(h["input_shape"], "input_shape");
  spec.num_classes = GetCount(h, "num_classes", "header");
  if (!h.contains("tap_layer") || !h["tap_layer"].is_string()) {
    throw FormatError("header must declare exactly one tap_layer");
  }
  spec.tap_layer = h["tap_layer"].get<std::string>();
  if (!h.contains("layers") || !h["layers"].is_array()) {
    throw FormatError("header: missing 'layers'");
  }

  const std::uint8_t* cursor = bytes.data() + 8 + header_len;
  const std::uint8_t* end = bytes.data() + bytes.size();
  for (const auto& j : h["layers"]) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
        !j.contains("type") || !j["type"].is_string()) {
      throw FormatError("layer entries need string 'name' and 'type'");
    }
    LayerSpec L;
    L.name = j["name"].get<std::string>();
    L.type = ParseLayerType(j["type"].get<std::string>());
    const std::string where = "layer '" + L.name + "'";
    switch (L.type) {
      case LayerType::kConv:
        L.in_channels = GetCount(j, "in_channels", where);
        L.out_channels = GetCount(j, "out_channels", where);
        L.kernel = GetCount(j, "kernel", where);
        L.padding = GetCount(j, "padding", where);
        break;
      case LayerType::kMaxPool:
        L.pool = GetCount(j, "pool", where);
        break;
      case LayerType::kDense:
        L.in_features = GetCount(j, "in_features", where);
        L.out_features = GetCount(j, "out_features", where);
        break;
      case LayerType::kRelu:
        break;
    }
    if (L.type == LayerType::kConv || L.type == LayerType::kDense) {
      if (!j.contains("params") || !j["params"].is_object() ||
          !j["params"].contains("weight") || !j["params"].contains("bias")) {
        throw FormatError(where + ": missing params");
      }
      if (ShapeFromJson(j["params"]["weight"], where + " weight") != L.WeightShape() ||
          ShapeFromJson(j["params"]["bias"], where + " bias") != L.BiasShape()) {
        throw FormatError(where + ": params shapes disagree with layer geometry");
      }
      L.weight = TakeFloats(cursor, end, ShapeNumel(L.WeightShape()), L.name, "weight");
      L.bias = TakeFloats(cursor, end, ShapeNumel(L.BiasShape()), L.name, "bias");
    }
    spec.layers.push_back(std::move(L));
  }
  if (cursor != end) {
    throw FormatError("weight payload has " + std::to_string(end - cursor) +
                      " trailing bytes");
  }
  if (h.contains("payload_floats") &&
      GetCount(h, "payload_floats", "header") != PayloadFloats(spec)) {
    throw FormatError("header payload_floats disagrees with layer parameters");
  }
  return spec;
}

void SaveWeights(const ModelSpec& spec, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = EncodeWeights(spec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ModelSpec ReadWeightFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weight file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return DecodeWeights(bytes);
}

SequentialCnn LoadWeights(const std::filesystem::path& path) {
  return SequentialCnn(ReadWeightFile(path));
}

}  // namespace scorecam

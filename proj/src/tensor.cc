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

#include "scorecam/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "scorecam/errors.h"

namespace scorecam {

std::size_t ShapeNumel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw ShapeError("tensor extents must be positive, got " +
                       ShapeToString(shape_));
    }
  }
  if (ShapeNumel(shape_) != data_.size()) {
    throw ShapeError("shape " + ShapeToString(shape_) + " needs " +
                     std::to_string(ShapeNumel(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError("non-finite tensor element at flat index " +
                         std::to_string(i));
    }
  }
}

Tensor Tensor::Zeros(Shape shape) { return Full(std::move(shape), 0.0); }

Tensor Tensor::Full(Shape shape, double value) {
  std::size_t n = ShapeNumel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::Vector(std::initializer_list<double> values) {
  return Vector(std::vector<double>(values));
}

Tensor Tensor::Vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeToString(shape_));
  }
  return shape_[axis];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  return data_[i * shape_[1] + j];
}

double Tensor::at(std::size_t k, std::size_t i, std::size_t j) const {
  return data_[(k * shape_[1] + i) * shape_[2] + j];
}

Tensor Tensor::Slice(std::size_t k) const {
  if (rank() != 3) throw ShapeError("Slice expects a rank-3 tensor");
  if (k >= shape_[0]) throw ShapeError("slice index out of range");
  std::size_t plane = shape_[1] * shape_[2];
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(k * plane);
  return Tensor({shape_[1], shape_[2]},
                std::vector<double>(first, first + static_cast<std::ptrdiff_t>(plane)));
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (ShapeNumel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + ShapeToString(shape_) + " to " +
                     ShapeToString(shape));
  }
  return Tensor(std::move(shape), data_);
}

double Tensor::Min() const {
  if (data_.empty()) throw ShapeError("Min of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

double Tensor::Max() const {
  if (data_.empty()) throw ShapeError("Max of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

double Tensor::Sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

Tensor Stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("Stack needs at least one tensor");
  const Shape& inner = parts.front().shape();
  std::vector<double> data;
  data.reserve(parts.size() * parts.front().numel());
  for (const Tensor& t : parts) {
    if (t.shape() != inner) {
      throw ShapeError("Stack: " + ShapeToString(t.shape()) + " vs " +
                       ShapeToString(inner));
    }
    data.insert(data.end(), t.values().begin(), t.values().end());
  }
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace scorecam

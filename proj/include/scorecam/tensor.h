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

#ifndef SCORECAM_TENSOR_H_
#define SCORECAM_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace scorecam {

using Shape = std::vector<std::size_t>;

std::size_t ShapeNumel(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major tensor of doubles.
//
// Every constructed tensor has positive extents, product(shape) elements and
// only finite values; constructors throw ShapeError / NumericError otherwise.
// A default-constructed tensor is the empty placeholder (rank 0, no data).
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(Shape shape);
  static Tensor Full(Shape shape, double value);
  // 1-D tensor from a list of values.
  static Tensor Vector(std::initializer_list<double> values);
  static Tensor Vector(std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double at(std::size_t i, std::size_t j) const;
  double at(std::size_t k, std::size_t i, std::size_t j) const;

  // Copy of channel `k` of a rank-3 tensor as a rank-2 tensor.
  Tensor Slice(std::size_t k) const;
  Tensor Reshaped(Shape shape) const;

  double Min() const;
  double Max() const;
  // Sum in ascending index order.
  double Sum() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Stacks equally shaped tensors along a new leading axis.
Tensor Stack(std::span<const Tensor> parts);

}  // namespace scorecam

#endif  // SCORECAM_TENSOR_H_

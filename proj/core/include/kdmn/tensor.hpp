// Copyright 2026 The KDMN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KDMN_TENSOR_HPP_
#define KDMN_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdmn::num {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape &shape);
std::size_t ShapeCount(const Shape &shape);

// Raised when operand shapes are incompatible. The message names both shapes.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string &op, const Shape &a, const Shape &b);
  explicit DimensionError(const std::string &what)
      : std::invalid_argument(what) {}
};

// Raised when a NaN or Inf shows up where only finite values are allowed.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Dense row-major tensor of 64-bit floats. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) are what the model uses; higher ranks are stored but no
// primitive operates on them.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape);

  // Takes ownership of values; rejects a count mismatch and non-finite values.
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double value);
  static Tensor Vector(std::vector<double> values);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);
  static Tensor Filled(Shape shape, double value);

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  // Matrix accessors. rows() of a vector is 1 and cols() is its length.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }
  const std::vector<double> &values() const { return values_; }

  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double &at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }

  // Value of a single-element tensor.
  double item() const;

  bool AllFinite() const;
  void Fill(double value);

  // Elementwise this += other. Shapes must match.
  void AddInPlace(const Tensor &other);

  bool operator==(const Tensor &other) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace kdmn::num

#endif  // KDMN_TENSOR_HPP_

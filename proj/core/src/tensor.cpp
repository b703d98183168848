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

#include "kdmn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kdmn::num {

std::string ShapeString(const Shape &shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t ShapeCount(const Shape &shape) {
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  return count;
}

DimensionError::DimensionError(const std::string &op, const Shape &a,
                               const Shape &b)
    : std::invalid_argument(op + ": incompatible shapes " + ShapeString(a) +
                            " and " + ShapeString(b)) {}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), values_(ShapeCount(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != ShapeCount(shape_)) {
    throw DimensionError("tensor of shape " + ShapeString(shape_) +
                         " given " + std::to_string(values_.size()) +
                         " values");
  }
  if (!AllFinite()) {
    throw NonFiniteError("tensor of shape " + ShapeString(shape_) +
                         " contains NaN or Inf");
  }
}

Tensor Tensor::Scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::Vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::Filled(Shape shape, double value) {
  Tensor t(std::move(shape));
  t.Fill(value);
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  return 1;
}

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 1;
  return shape_.back();
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw DimensionError("item() on tensor of shape " + ShapeString(shape_));
  }
  return values_[0];
}

bool Tensor::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::Fill(double value) {
  std::fill(values_.begin(), values_.end(), value);
}

void Tensor::AddInPlace(const Tensor &other) {
  if (other.shape_ != shape_) throw DimensionError("add", shape_, other.shape_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

}  // namespace kdmn::num

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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace kdmn::num {
namespace {

TEST(TensorTest, ZeroConstructedWithShape) {
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  for (double v : t.data()) EXPECT_EQ(v, 0.0);
}

TEST(TensorTest, RowMajorLayout) {
  Tensor m = Tensor::Matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.at(0, 2), 3.0);
  EXPECT_EQ(m.at(1, 0), 4.0);
}

TEST(TensorTest, ScalarAndVectorFactories) {
  EXPECT_EQ(Tensor::Scalar(2.5).item(), 2.5);
  EXPECT_EQ(Tensor::Scalar(2.5).rank(), 0u);
  Tensor v = Tensor::Vector({1, 2});
  EXPECT_EQ(v.rank(), 1u);
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 2u);
  EXPECT_THROW(v.item(), DimensionError);
}

TEST(TensorTest, RejectsCountMismatch) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST(TensorTest, RejectsNonFiniteValues) {
  EXPECT_THROW(Tensor::Vector({1.0, std::numeric_limits<double>::quiet_NaN()}),
               NonFiniteError);
  EXPECT_THROW(Tensor::Vector({std::numeric_limits<double>::infinity()}), NonFiniteError);
}

TEST(TensorTest, AddInPlaceChecksShapes) {
  Tensor a = Tensor::Vector({1, 2});
  a.AddInPlace(Tensor::Vector({10, 20}));
  EXPECT_EQ(a, Tensor::Vector({11, 22}));
  EXPECT_THROW(a.AddInPlace(Tensor::Vector({1, 2, 3})), DimensionError);
}

TEST(TensorTest, DimensionErrorNamesBothShapes) {
  DimensionError e("matmul", {2, 3}, {4, 5});
  const std::string what = e.what();
  EXPECT_NE(what.find("[2x3]"), std::string::npos);
  EXPECT_NE(what.find("[4x5]"), std::string::npos);
}

TEST(TensorTest, FilledAndFill) {
  Tensor t = Tensor::Filled({3}, 1.5);
  EXPECT_EQ(t, Tensor::Vector({1.5, 1.5, 1.5}));
  t.Fill(0.0);
  EXPECT_EQ(t, Tensor({3}));
}

}  // namespace
}  // namespace kdmn::num

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

// Central-difference checks of every differentiable building block: each
// tensor primitive at random points, the triple encoder, the episodic
// memory, and the full per-question loss in every mode on a tiny model.

#ifndef KDMN_GRADSUITE_HPP_
#define KDMN_GRADSUITE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "kdmn/gradcheck.hpp"

namespace kdmn {

struct GradSuiteOptions {
  std::uint64_t seed = 1;
  std::size_t primitive_points = 100;  // random points per primitive
  double primitive_epsilon = 1e-5;
  // Tiny model: LSTM width, and top-N triples per question.
  std::size_t hidden = 8;
  std::size_t top_n = 3;
  std::size_t model_contexts = 2;  // questions checked per mode
  std::size_t max_per_param = 40;  // coordinates probed per parameter tensor
  double model_epsilon = 1e-3;
  double init_bound = 0.3;
};

struct GradSuiteEntry {
  std::string name;
  double epsilon = 0.0;
  num::GradCheckResult result;
};

std::vector<GradSuiteEntry> RunGradientSuite(const GradSuiteOptions &options = {});

double MaxRelativeError(const std::vector<GradSuiteEntry> &entries);

}  // namespace kdmn

#endif  // KDMN_GRADSUITE_HPP_

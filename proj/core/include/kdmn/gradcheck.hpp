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

#ifndef KDMN_GRADCHECK_HPP_
#define KDMN_GRADCHECK_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kdmn/autodiff.hpp"

namespace kdmn::num {

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Where the worst error was seen: "input 0 [3]" or "param mem.w2 [17]".
  std::string worst;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coordinates = 0;
  // Coordinates left out because the loss is not smooth within epsilon.
  std::size_t kinks = 0;
};

// |a - n| / max(|a|, |n|, 1e-8)
double RelativeError(double analytic, double numeric);

// f builds a single-element output from leaves standing for `point`.
using InputFn = std::function<Var(Tape &tape, std::span<const Var> inputs)>;

// Compares Backward() against central differences (f(x+e) - f(x-e)) / 2e
// for every coordinate of every input tensor.
GradCheckResult GradCheck(const InputFn &f, const std::vector<Tensor> &point,
                          double epsilon = 1e-5);

// f builds a scalar loss on a tape bound to `params`.
using LossFn = std::function<Var(Tape &tape)>;

// Same comparison over parameter coordinates. Parameters whose names are not
// accepted by `filter` (when given) are skipped. `max_per_param` limits how
// many coordinates of each tensor are probed, spread evenly; 0 probes all.
// With `skip_kinks`, a coordinate whose differences at epsilon and
// epsilon / 2 disagree by more than 0.1% (a ReLU or clamp boundary inside
// the probe interval) is counted in `kinks` instead of being compared.
GradCheckResult GradCheckParams(
    ParameterStore &params, const LossFn &f, double epsilon = 1e-5,
    std::size_t max_per_param = 0,
    const std::function<bool(const std::string &)> &filter = nullptr,
    bool skip_kinks = false);

}  // namespace kdmn::num

#endif  // KDMN_GRADCHECK_HPP_

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

#include "kdmn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace kdmn::num {
namespace {

constexpr double kKinkTolerance = 1e-3;

void Record(GradCheckResult &result, double analytic, double numeric,
            const std::string &where) {
  const double err = RelativeError(analytic, numeric);
  ++result.coordinates;
  if (result.coordinates == 1 || err > result.max_relative_error) {
    result.max_relative_error = err;
    result.worst = where;
    result.analytic_at_worst = analytic;
    result.numeric_at_worst = numeric;
  }
}

double EvalInputs(const InputFn &f, const std::vector<Tensor> &point) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const auto &t : point) leaves.push_back(tape.Constant(t));
  return f(tape, leaves).value().item();
}

double EvalLoss(const ParameterStore &params, const LossFn &f) {
  Tape tape(params);
  return f(tape).value().item();
}

}  // namespace

double RelativeError(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult GradCheck(const InputFn &f, const std::vector<Tensor> &point,
                          double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto &t : point) leaves.push_back(tape.Input(t));
    Var out = f(tape, leaves);
    tape.Backward(out);
    for (Var v : leaves) analytic.push_back(tape.Grad(v));
  }
  GradCheckResult result;
  std::vector<Tensor> probe = point;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t i = 0; i < probe[k].size(); ++i) {
      const double saved = probe[k][i];
      probe[k][i] = saved + epsilon;
      const double up = EvalInputs(f, probe);
      probe[k][i] = saved - epsilon;
      const double down = EvalInputs(f, probe);
      probe[k][i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      Record(result, analytic[k][i], numeric,
             "input " + std::to_string(k) + " [" + std::to_string(i) + "]");
    }
  }
  return result;
}

GradCheckResult GradCheckParams(
    ParameterStore &params, const LossFn &f, double epsilon,
    std::size_t max_per_param,
    const std::function<bool(const std::string &)> &filter, bool skip_kinks) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  GradientBuffer analytic = params.MakeGradientBuffer();
  {
    Tape tape(params, &analytic);
    Var out = f(tape);
    tape.Backward(out);
  }
  GradCheckResult result;
  auto &entries = params.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (filter && !filter(entries[k].name)) continue;
    Tensor &value = entries[k].value;
    const std::size_t n = value.size();
    std::size_t stride = 1;
    if (max_per_param > 0 && n > max_per_param) {
      stride = (n + max_per_param - 1) / max_per_param;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = value[i];
      auto central = [&](double e) {
        value[i] = saved + e;
        const double up = EvalLoss(params, f);
        value[i] = saved - e;
        const double down = EvalLoss(params, f);
        value[i] = saved;
        return (up - down) / (2.0 * e);
      };
      const double numeric = central(epsilon);
      if (skip_kinks) {
        const double half = central(0.5 * epsilon);
        if (std::abs(numeric - half) > kKinkTolerance * std::max({std::abs(numeric), std::abs(half), 1e-8})) {
          ++result.kinks;
          continue;
        }
      }
      Record(result, analytic[k][i], numeric,
             "param " + entries[k].name + " [" + std::to_string(i) + "]");
    }
  }
  return result;
}

}  // namespace kdmn::num

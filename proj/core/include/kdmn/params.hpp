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

#ifndef KDMN_PARAMS_HPP_
#define KDMN_PARAMS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kdmn/tensor.hpp"

namespace kdmn::num {

// Gradient accumulators laid out in the same order as a ParameterStore.
using GradientBuffer = std::vector<Tensor>;

// Named learnable tensors with matching gradient accumulators. Insertion
// order is the canonical order for checkpoints and deterministic reductions.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
  };

  // Registers a zero-initialized parameter. Names must be unique.
  Tensor &Add(const std::string &name, Shape shape);

  bool Contains(std::string_view name) const;
  std::optional<std::size_t> IndexOf(std::string_view name) const;
  std::size_t Index(std::string_view name) const;  // throws if absent

  Tensor &Value(std::string_view name);
  const Tensor &Value(std::string_view name) const;
  Tensor &Grad(std::string_view name);
  const Tensor &Grad(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::vector<Entry> &entries() { return entries_; }
  const std::vector<Entry> &entries() const { return entries_; }

  // Total number of scalar parameters.
  std::size_t ParameterCount() const;

  // Every value drawn uniformly from [-bound, bound], in insertion order.
  void InitUniform(std::mt19937_64 &rng, double bound);

  void ZeroGrad();
  GradientBuffer MakeGradientBuffer() const;
  void AccumulateGradients(const GradientBuffer &buffer);

  // value -= learning_rate * grad for every parameter.
  void SgdStep(double learning_rate);

  // Name of the first parameter holding a NaN/Inf, if any.
  std::optional<std::string> FirstNonFinite() const;

  // Checkpoint: text header with one "name rank dims..." line per tensor,
  // then the little-endian float64 payload in header order.
  void Save(std::ostream &out) const;
  void SaveFile(const std::string &path) const;
  // Overwrites values of an already-shaped store; names and shapes must match.
  void Load(std::istream &in);
  void LoadFile(const std::string &path);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace kdmn::num

#endif  // KDMN_PARAMS_HPP_

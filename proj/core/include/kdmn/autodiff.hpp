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

// Reverse-mode differentiation over dense tensors.
//
// A Tape records every primitive applied during one forward pass. Calling
// Backward() on a single-element result walks the record in reverse and
// accumulates gradients into the leaves: parameter leaves flush into the
// gradient buffer the tape was bound to, input leaves keep theirs on the
// tape (see Tape::Grad). A tape is confined to one thread; several tapes may
// read the same ParameterStore concurrently as long as each writes to its
// own GradientBuffer.

#ifndef KDMN_AUTODIFF_HPP_
#define KDMN_AUTODIFF_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "kdmn/params.hpp"
#include "kdmn/tensor.hpp"

namespace kdmn::num {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; only valid while the
// tape that produced it is alive.
class Var {
 public:
  Var() = default;

  // The reference stays valid as the tape grows.
  const Tensor &value() const;
  const Shape &shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Tape *tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape *tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape &tape, std::size_t self)>;

  // Forward-only tape: parameters are read as constants.
  Tape() = default;
  explicit Tape(const ParameterStore &params) : params_(&params) {}
  // Parameter gradients accumulate into the store's own accumulators.
  explicit Tape(ParameterStore *params);
  // Parameter gradients accumulate into an external buffer laid out like
  // params (used for data-parallel shards).
  Tape(const ParameterStore &params, GradientBuffer *sink);

  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var Constant(Tensor value);
  // Leaf whose gradient is kept on the tape and read back with Grad().
  Var Input(Tensor value);
  // Leaf bound to a named parameter; repeated calls return the same leaf.
  Var Param(std::string_view name);

  // Accumulates d(output)/d(leaf) for every leaf reachable from output.
  // Throws DimensionError unless output holds exactly one value.
  void Backward(Var output);

  // Gradient held for any node after Backward(); zeros if none reached it.
  Tensor Grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  bool records_gradients() const {
    return sink_ != nullptr || owner_ != nullptr;
  }

  // Op-author interface.
  const Tensor &ValueOf(std::size_t id) const { return nodes_[id].value; }
  Tensor &GradOf(std::size_t id);
  bool RequiresGrad(std::size_t id) const { return nodes_[id].requires_grad; }
  Var Push(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var Push(Tensor value, std::span<const Var> parents, BackwardFn fn);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool keep_grad = false;
    long param_index = -1;
  };

  Var Leaf(Tensor value, bool requires_grad, bool keep_grad);

  const ParameterStore *params_ = nullptr;
  ParameterStore *owner_ = nullptr;
  GradientBuffer *sink_ = nullptr;
  std::deque<Node> nodes_;
  std::vector<long> param_nodes_;
};

// ---------------------------------------------------------------------------
// Primitives. Rank-1 operands act as row vectors on the left of a product
// and column vectors on the right; results drop the unit dimension again.

// a[m,k] * b[k,n]
Var MatMul(Var a, Var b);
// a[m,k] * transpose(b[n,k]); the usual affine layer x * W^T.
Var MatMulNT(Var a, Var b);
Var Add(Var a, Var b);
// a[m,n] + bias[n] on every row, or a[n] + bias[n].
Var AddBias(Var a, Var bias);
Var Hadamard(Var a, Var b);
Var Scale(Var a, double factor);
Var Tanh(Var a);
Var Relu(Var a);
Var Sigmoid(Var a);
// Numerically stable softmax over a rank-1 tensor.
Var Softmax(Var a);
// Concatenation of scalars and rank-1 tensors into a vector.
Var Concat(std::span<const Var> parts);
Var Concat(std::initializer_list<Var> parts);
// Concatenation of rank-2 tensors with equal row counts, along columns.
Var ConcatCols(std::span<const Var> parts);
Var ConcatCols(std::initializer_list<Var> parts);
// Range [begin, begin+len) of the last dimension.
Var Slice(Var a, std::size_t begin, std::size_t len);
// Selected rows of a rank-2 tensor, as a [rows.size(), cols] matrix.
Var GatherRows(Var a, std::span<const std::size_t> rows);
// One row of a rank-2 tensor, as a vector.
Var Row(Var a, std::size_t row);
Var Element(Var a, std::size_t index);
Var Sum(Var a);
// -(y log p + (1-y) log(1-p)) with p clamped into [eps, 1-eps]; the
// gradient is zero where the clamp is active.
Var BinaryCrossEntropy(Var p, double label, double eps = 1e-12);

// Weights of one LSTM layer. Gate rows are stacked as input, forget,
// candidate, output: wx[4h, in], wh[4h, h], b[4h].
struct LstmWeights {
  Var wx;
  Var wh;
  Var b;
};

struct LstmState {
  Var h;
  Var c;
};

// Standard LSTM cell on a single vector or on a batch of rows.
LstmState LstmCell(Var x, const LstmState &prev, const LstmWeights &w);

// Scalar helpers used by losses and tests outside the tape.
double SoftmaxProbability(double logit_neg, double logit_pos);
double BinaryCrossEntropyValue(double p, double label, double eps = 1e-12);

}  // namespace kdmn::num

#endif  // KDMN_AUTODIFF_HPP_

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

#include "kdmn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kdmn::num {
namespace {

// C[m,n] += op(A)[m,k] * op(B)[k,n]. A is stored [m,k] (or [k,m] when
// trans_a) and B is stored [k,n] (or [n,k] when trans_b), all row-major.
// Each output row is computed independently of every other row, so a
// batched product matches the per-row product bit for bit.
void Gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const double *a, const double *b, double *c) {
  if (!trans_a && !trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      double *crow = c + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = a[i * k + p];
        const double *brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      const double *arow = a + i * k;
      for (std::size_t j = 0; j < n; ++j) {
        const double *brow = b + j * k;
        double sum = 0.0;
        for (std::size_t p = 0; p < k; ++p) sum += arow[p] * brow[p];
        c[i * n + j] += sum;
      }
    }
  } else if (trans_a && !trans_b) {
    for (std::size_t p = 0; p < k; ++p) {
      const double *brow = b + p * n;
      for (std::size_t i = 0; i < m; ++i) {
        const double av = a[p * m + i];
        double *crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t p = 0; p < k; ++p) sum += a[p * m + i] * b[j * k + p];
        c[i * n + j] += sum;
      }
    }
  }
}

Tape &SameTape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw std::invalid_argument("operands recorded on different tapes");
  }
  return *a.tape();
}

void RequireSameShape(const char *op, Var a, Var b) {
  if (a.shape() != b.shape()) throw DimensionError(op, a.shape(), b.shape());
}

void RequireRank(const char *op, Var a, std::size_t lo, std::size_t hi) {
  if (a.shape().size() < lo || a.shape().size() > hi) {
    throw DimensionError(std::string(op) + ": unsupported rank for shape " +
                         ShapeString(a.shape()));
  }
}

template <typename F, typename D>
Var Elementwise(Var a, F forward, D derivative) {
  Tape &tape = *a.tape();
  const Tensor &x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = forward(x[i]);
  const std::size_t pa = a.id();
  return tape.Push(std::move(y), {a}, [pa, derivative](Tape &t, std::size_t self) {
    const Tensor &gy = t.GradOf(self);
    const Tensor &x = t.ValueOf(pa);
    const Tensor &y = t.ValueOf(self);
    Tensor &gx = t.GradOf(pa);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * derivative(x[i], y[i]);
  });
}

}  // namespace

const Tensor &Var::value() const { return tape_->ValueOf(id_); }

Tape::Tape(ParameterStore *params) : params_(params), owner_(params) {}

Tape::Tape(const ParameterStore &params, GradientBuffer *sink)
    : params_(&params), sink_(sink) {
  if (sink_ != nullptr && sink_->size() != params.size()) {
    throw std::invalid_argument("gradient buffer does not match store");
  }
}

Var Tape::Leaf(Tensor value, bool requires_grad, bool keep_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.keep_grad = keep_grad;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Constant(Tensor value) { return Leaf(std::move(value), false, false); }

Var Tape::Input(Tensor value) { return Leaf(std::move(value), true, true); }

Var Tape::Param(std::string_view name) {
  if (params_ == nullptr) {
    throw std::logic_error("tape has no parameter store bound");
  }
  const std::size_t index = params_->Index(name);
  if (param_nodes_.empty()) param_nodes_.assign(params_->size(), -1);
  if (param_nodes_[index] >= 0) {
    return Var(this, static_cast<std::size_t>(param_nodes_[index]));
  }
  Var v = Leaf(params_->entries()[index].value, records_gradients(), false);
  nodes_.back().param_index = static_cast<long>(index);
  param_nodes_[index] = static_cast<long>(v.id());
  return v;
}

Tensor &Tape::GradOf(std::size_t id) {
  Node &node = nodes_[id];
  if (node.grad.shape() != node.value.shape() || node.grad.empty()) {
    node.grad = Tensor(node.value.shape());
  }
  return node.grad;
}

Tensor Tape::Grad(Var v) const {
  const Node &node = nodes_.at(v.id());
  if (node.grad.size() != node.value.size()) return Tensor(node.value.shape());
  return node.grad;
}

Var Tape::Push(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
  return Push(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
              std::move(fn));
}

Var Tape::Push(Tensor value, std::span<const Var> parents, BackwardFn fn) {
  bool needs_grad = false;
  for (Var p : parents) {
    if (p.tape() != this) throw std::invalid_argument("operand from another tape");
    needs_grad = needs_grad || nodes_[p.id()].requires_grad;
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs_grad;
  if (needs_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::Backward(Var output) {
  if (output.tape() != this) throw std::invalid_argument("output from another tape");
  if (output.value().size() != 1) {
    throw DimensionError("backward needs a single-element output, got shape " +
                         ShapeString(output.shape()));
  }
  for (Node &node : nodes_) node.grad = Tensor();
  GradOf(output.id())[0] = 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node &node = nodes_[id];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, id);
    if (node.param_index >= 0) {
      const auto idx = static_cast<std::size_t>(node.param_index);
      if (sink_ != nullptr) {
        (*sink_)[idx].AddInPlace(node.grad);
      } else if (owner_ != nullptr) {
        owner_->entries()[idx].grad.AddInPlace(node.grad);
      }
    }
  }
  // Interior gradients are dropped; leaf gradients stay readable.
  for (Node &node : nodes_) {
    if (!node.keep_grad && node.param_index < 0) node.grad = Tensor();
  }
}

// ---------------------------------------------------------------------------

Var MatMul(Var a, Var b) {
  Tape &tape = SameTape(a, b);
  RequireRank("matmul", a, 1, 2);
  RequireRank("matmul", b, 1, 2);
  const Shape &sa = a.shape();
  const Shape &sb = b.shape();
  const std::size_t m = sa.size() == 2 ? sa[0] : 1;
  const std::size_t k = sa.back();
  const std::size_t kb = sb[0];
  const std::size_t n = sb.size() == 2 ? sb[1] : 1;
  if (k != kb) throw DimensionError("matmul", sa, sb);
  Shape out;
  if (sa.size() == 2) out.push_back(m);
  if (sb.size() == 2) out.push_back(n);
  Tensor c(out);
  Gemm(false, false, m, n, k, a.value().data().data(), b.value().data().data(),
       c.data().data());
  const std::size_t pa = a.id(), pb = b.id();
  return tape.Push(std::move(c), {a, b}, [=](Tape &t, std::size_t self) {
    const double *gc = t.GradOf(self).data().data();
    if (t.RequiresGrad(pa)) {
      Gemm(false, true, m, k, n, gc, t.ValueOf(pb).data().data(),
           t.GradOf(pa).data().data());
    }
    if (t.RequiresGrad(pb)) {
      Gemm(true, false, k, n, m, t.ValueOf(pa).data().data(), gc,
           t.GradOf(pb).data().data());
    }
  });
}

Var MatMulNT(Var a, Var b) {
  Tape &tape = SameTape(a, b);
  RequireRank("matmul_nt", a, 1, 2);
  RequireRank("matmul_nt", b, 2, 2);
  const Shape &sa = a.shape();
  const Shape &sb = b.shape();
  const std::size_t m = sa.size() == 2 ? sa[0] : 1;
  const std::size_t k = sa.back();
  const std::size_t n = sb[0];
  if (sb[1] != k) throw DimensionError("matmul_nt", sa, sb);
  Shape out;
  if (sa.size() == 2) out.push_back(m);
  out.push_back(n);
  Tensor c(out);
  Gemm(false, true, m, n, k, a.value().data().data(), b.value().data().data(),
       c.data().data());
  const std::size_t pa = a.id(), pb = b.id();
  return tape.Push(std::move(c), {a, b}, [=](Tape &t, std::size_t self) {
    const double *gc = t.GradOf(self).data().data();
    if (t.RequiresGrad(pa)) {
      Gemm(false, false, m, k, n, gc, t.ValueOf(pb).data().data(),
           t.GradOf(pa).data().data());
    }
    if (t.RequiresGrad(pb)) {
      Gemm(true, false, n, k, m, gc, t.ValueOf(pa).data().data(),
           t.GradOf(pb).data().data());
    }
  });
}

Var Add(Var a, Var b) {
  Tape &tape = SameTape(a, b);
  RequireSameShape("add", a, b);
  Tensor c = a.value();
  c.AddInPlace(b.value());
  const std::size_t pa = a.id(), pb = b.id();
  return tape.Push(std::move(c), {a, b}, [=](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    if (t.RequiresGrad(pa)) t.GradOf(pa).AddInPlace(g);
    if (t.RequiresGrad(pb)) t.GradOf(pb).AddInPlace(g);
  });
}

Var AddBias(Var a, Var bias) {
  Tape &tape = SameTape(a, bias);
  RequireRank("add_bias", a, 1, 2);
  RequireRank("add_bias", bias, 1, 1);
  const std::size_t n = bias.shape()[0];
  if (a.shape().back() != n) throw DimensionError("add_bias", a.shape(), bias.shape());
  const std::size_t rows = a.value().size() / n;
  Tensor c = a.value();
  const Tensor &bv = bias.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) c[r * n + j] += bv[j];
  }
  const std::size_t pa = a.id(), pb = bias.id();
  return tape.Push(std::move(c), {a, bias}, [=](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    if (t.RequiresGrad(pa)) t.GradOf(pa).AddInPlace(g);
    if (t.RequiresGrad(pb)) {
      Tensor &gb = t.GradOf(pb);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[r * n + j];
      }
    }
  });
}

Var Hadamard(Var a, Var b) {
  Tape &tape = SameTape(a, b);
  RequireSameShape("hadamard", a, b);
  Tensor c(a.shape());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.value()[i] * b.value()[i];
  const std::size_t pa = a.id(), pb = b.id();
  return tape.Push(std::move(c), {a, b}, [=](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    if (t.RequiresGrad(pa)) {
      Tensor &ga = t.GradOf(pa);
      const Tensor &bv = t.ValueOf(pb);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.RequiresGrad(pb)) {
      Tensor &gb = t.GradOf(pb);
      const Tensor &av = t.ValueOf(pa);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Scale(Var a, double factor) {
  return Elementwise(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var Tanh(Var a) {
  return Elementwise(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Relu(Var a) {
  return Elementwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Sigmoid(Var a) {
  return Elementwise(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var Softmax(Var a) {
  Tape &tape = *a.tape();
  RequireRank("softmax", a, 1, 1);
  const Tensor &x = a.value();
  if (x.size() == 0) throw DimensionError("softmax of an empty vector");
  const double hi = *std::max_element(x.data().begin(), x.data().end());
  Tensor y(x.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - hi);
    total += y[i];
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= total;
  const std::size_t pa = a.id();
  return tape.Push(std::move(y), {a}, [pa](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    const Tensor &y = t.ValueOf(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
    Tensor &gx = t.GradOf(pa);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - dot);
  });
}

Var Concat(std::initializer_list<Var> parts) {
  return Concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  Tape &tape = *parts[0].tape();
  std::size_t total = 0;
  for (Var p : parts) {
    RequireRank("concat", p, 0, 1);
    total += p.value().size();
  }
  Tensor c({total});
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;
  std::size_t at = 0;
  for (Var p : parts) {
    offsets.push_back(at);
    ids.push_back(p.id());
    std::copy(p.value().data().begin(), p.value().data().end(), c.data().begin() + at);
    at += p.value().size();
  }
  return tape.Push(std::move(c), parts, [offsets, ids](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t id = ids[k];
      if (!t.RequiresGrad(id)) continue;
      const std::size_t n = t.ValueOf(id).size();
      Tensor &gp = t.GradOf(id);
      for (std::size_t i = 0; i < n; ++i) gp[i] += g[offsets[k] + i];
    }
  });
}

Var ConcatCols(std::initializer_list<Var> parts) {
  return ConcatCols(std::span<const Var>(parts.begin(), parts.size()));
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  Tape &tape = *parts[0].tape();
  const std::size_t rows = parts[0].shape().at(0);
  std::size_t total = 0;
  for (Var p : parts) {
    RequireRank("concat_cols", p, 2, 2);
    if (p.shape()[0] != rows) throw DimensionError("concat_cols", parts[0].shape(), p.shape());
    total += p.shape()[1];
  }
  Tensor c({rows, total});
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;
  std::size_t at = 0;
  for (Var p : parts) {
    const std::size_t w = p.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < w; ++j) c[r * total + at + j] = p.value()[r * w + j];
    }
    offsets.push_back(at);
    ids.push_back(p.id());
    at += w;
  }
  return tape.Push(std::move(c), parts,
                   [offsets, ids, rows, total](Tape &t, std::size_t self) {
                     const Tensor &g = t.GradOf(self);
                     for (std::size_t k = 0; k < ids.size(); ++k) {
                       if (!t.RequiresGrad(ids[k])) continue;
                       const std::size_t w = t.ValueOf(ids[k]).shape()[1];
                       Tensor &gp = t.GradOf(ids[k]);
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t j = 0; j < w; ++j) {
                           gp[r * w + j] += g[r * total + offsets[k] + j];
                         }
                       }
                     }
                   });
}

Var Slice(Var a, std::size_t begin, std::size_t len) {
  Tape &tape = *a.tape();
  RequireRank("slice", a, 1, 2);
  const std::size_t width = a.shape().back();
  if (begin + len > width) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " +
                         std::to_string(begin + len) + ") out of range for shape " +
                         ShapeString(a.shape()));
  }
  const std::size_t rows = a.value().size() / width;
  Shape out = a.shape();
  out.back() = len;
  Tensor c(out);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < len; ++j) c[r * len + j] = a.value()[r * width + begin + j];
  }
  const std::size_t pa = a.id();
  return tape.Push(std::move(c), {a}, [=](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    Tensor &ga = t.GradOf(pa);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < len; ++j) ga[r * width + begin + j] += g[r * len + j];
    }
  });
}

Var GatherRows(Var a, std::span<const std::size_t> rows) {
  Tape &tape = *a.tape();
  RequireRank("gather_rows", a, 2, 2);
  const std::size_t n = a.shape()[0];
  const std::size_t w = a.shape()[1];
  for (std::size_t r : rows) {
    if (r >= n) {
      throw DimensionError("gather_rows: row " + std::to_string(r) +
                           " out of range for shape " + ShapeString(a.shape()));
    }
  }
  Tensor c({rows.size(), w});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::copy_n(a.value().data().begin() + rows[k] * w, w, c.data().begin() + k * w);
  }
  std::vector<std::size_t> picked(rows.begin(), rows.end());
  const std::size_t pa = a.id();
  return tape.Push(std::move(c), {a}, [pa, picked, w](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    Tensor &ga = t.GradOf(pa);
    for (std::size_t k = 0; k < picked.size(); ++k) {
      for (std::size_t j = 0; j < w; ++j) ga[picked[k] * w + j] += g[k * w + j];
    }
  });
}

Var Row(Var a, std::size_t row) {
  Tape &tape = *a.tape();
  RequireRank("row", a, 2, 2);
  const std::size_t w = a.shape()[1];
  if (row >= a.shape()[0]) {
    throw DimensionError("row " + std::to_string(row) + " out of range for shape " +
                         ShapeString(a.shape()));
  }
  Tensor c({w});
  std::copy_n(a.value().data().begin() + row * w, w, c.data().begin());
  const std::size_t pa = a.id();
  return tape.Push(std::move(c), {a}, [pa, row, w](Tape &t, std::size_t self) {
    const Tensor &g = t.GradOf(self);
    Tensor &ga = t.GradOf(pa);
    for (std::size_t j = 0; j < w; ++j) ga[row * w + j] += g[j];
  });
}

Var Element(Var a, std::size_t index) {
  Tape &tape = *a.tape();
  if (index >= a.value().size()) {
    throw DimensionError("element " + std::to_string(index) +
                         " out of range for shape " + ShapeString(a.shape()));
  }
  const std::size_t pa = a.id();
  return tape.Push(Tensor::Scalar(a.value()[index]), {a},
                   [pa, index](Tape &t, std::size_t self) {
                     t.GradOf(pa)[index] += t.GradOf(self)[0];
                   });
}

Var Sum(Var a) {
  Tape &tape = *a.tape();
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::size_t pa = a.id();
  return tape.Push(Tensor::Scalar(total), {a}, [pa](Tape &t, std::size_t self) {
    const double g = t.GradOf(self)[0];
    for (double &v : t.GradOf(pa).data()) v += g;
  });
}

Var BinaryCrossEntropy(Var p, double label, double eps) {
  Tape &tape = *p.tape();
  if (p.value().size() != 1) {
    throw DimensionError("binary_cross_entropy needs a scalar probability, got " +
                         ShapeString(p.shape()));
  }
  const double raw = p.value()[0];
  const double value = BinaryCrossEntropyValue(raw, label, eps);
  const std::size_t pp = p.id();
  return tape.Push(Tensor::Scalar(value), {p},
                   [pp, raw, label, eps](Tape &t, std::size_t self) {
                     if (raw < eps || raw > 1.0 - eps) return;
                     const double g = t.GradOf(self)[0];
                     t.GradOf(pp)[0] += g * (-label / raw + (1.0 - label) / (1.0 - raw));
                   });
}

LstmState LstmCell(Var x, const LstmState &prev, const LstmWeights &w) {
  RequireRank("lstm_cell", w.wh, 2, 2);
  const std::size_t hidden = w.wh.shape()[1];
  if (w.wh.shape()[0] != 4 * hidden || w.wx.shape().size() != 2 ||
      w.wx.shape()[0] != 4 * hidden) {
    throw DimensionError("lstm_cell", w.wx.shape(), w.wh.shape());
  }
  Var pre = AddBias(Add(MatMulNT(x, w.wx), MatMulNT(prev.h, w.wh)), w.b);
  Var in_gate = Sigmoid(Slice(pre, 0, hidden));
  Var forget_gate = Sigmoid(Slice(pre, hidden, hidden));
  Var candidate = Tanh(Slice(pre, 2 * hidden, hidden));
  Var out_gate = Sigmoid(Slice(pre, 3 * hidden, hidden));
  Var c = Add(Hadamard(forget_gate, prev.c), Hadamard(in_gate, candidate));
  Var h = Hadamard(out_gate, Tanh(c));
  return {h, c};
}

double SoftmaxProbability(double logit_neg, double logit_pos) {
  const double hi = std::max(logit_neg, logit_pos);
  const double en = std::exp(logit_neg - hi);
  const double ep = std::exp(logit_pos - hi);
  return ep / (en + ep);
}

double BinaryCrossEntropyValue(double p, double label, double eps) {
  const double q = std::clamp(p, eps, 1.0 - eps);
  return -(label * std::log(q) + (1.0 - label) * std::log(1.0 - q));
}

}  // namespace kdmn::num

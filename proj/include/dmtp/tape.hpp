// Copyright 2026 The DMTP Authors
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

#ifndef DMTP_TAPE_HPP_
#define DMTP_TAPE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dmtp/tensor.hpp"

namespace dmtp
{

class Tape;

/// Handle to a tensor recorded on a tape.
class Var
{
public:
  Var() = default;

  const Tensor & value() const;
  const std::vector<int> & shape() const { return value().shape; }
  std::int64_t numel() const { return value().numel(); }
  int id() const { return id_; }
  Tape * tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Var(Tape * t, int id) : tape_(t), id_(id) {}

  Tape * tape_ = nullptr;
  int id_ = -1;
};

/// Append-only record of a forward computation. Operations register their
/// local gradient rules as closures; `backward` replays them in reverse
/// creation order, which is a valid topological order by construction.
/// Single-owner: a tape is never shared across threads.
class Tape
{
public:
  using BackwardFn = std::function<void(Tape &, int)>;

  Var leaf(Tensor t)
  {
    return push(std::move(t), {}, nullptr);
  }

  Var constant(Tensor t)
  {
    t.requires_grad = false;
    return push(std::move(t), {}, nullptr);
  }

  Var constant(double v) { return constant(Tensor::scalar(v)); }

  /// Internal entry point for operations.
  Var push(Tensor value, std::vector<int> parents, BackwardFn fn)
  {
    Node node;
    node.needs_grad = value.requires_grad;
    for (int p : parents) {
      node.needs_grad = node.needs_grad || nodes_[static_cast<std::size_t>(p)].needs_grad;
    }
    node.value = std::move(value);
    node.parents = std::move(parents);
    node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
  }

  const Tensor & val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  std::size_t size() const { return nodes_.size(); }

  /// Gradient of the node being differentiated, valid inside backward
  /// closures.
  const Tensor & out_grad(int id) const { return grads_[static_cast<std::size_t>(id)]; }

  /// Accumulation slot for a parent's gradient; allocates zeros on first use.
  Tensor & grad_slot(int id)
  {
    Tensor & g = grads_[static_cast<std::size_t>(id)];
    if (g.data.empty()) {
      g = Tensor::zeros(nodes_[static_cast<std::size_t>(id)].value.shape);
    }
    return g;
  }

  /// Reverse pass from a scalar loss. Gradients of every reachable
  /// grad-requiring node are populated; everything else reads as zero.
  void backward(const Var & loss)
  {
    if (loss.tape() != this) {
      throw ContractError("backward: loss recorded on a different tape");
    }
    const Tensor & lv = val(loss.id());
    if (lv.numel() != 1) {
      throw ContractError("backward: loss must be scalar, got shape " + shape_str(lv.shape));
    }
    if (!std::isfinite(lv.data[0])) {
      throw ContractError("backward: loss is not finite");
    }
    grads_.assign(nodes_.size(), Tensor{});
    grad_slot(loss.id()).data[0] = 1.0;
    for (int i = loss.id(); i >= 0; --i) {
      Node & node = nodes_[static_cast<std::size_t>(i)];
      if (!node.needs_grad || !node.backward) {
        continue;
      }
      if (grads_[static_cast<std::size_t>(i)].data.empty()) {
        continue;  // not reachable from the loss
      }
      node.backward(*this, i);
    }
    ran_backward_ = true;
  }

  /// Gradient of the loss w.r.t. `v`; zeros if `v` never received one
  /// (constant subgraphs differentiate to zero).
  Tensor grad(const Var & v) const
  {
    if (!ran_backward_) {
      throw ContractError("grad: backward has not been run");
    }
    const Tensor & g = grads_[static_cast<std::size_t>(v.id())];
    if (g.data.empty()) {
      return Tensor::zeros(val(v.id()).shape);
    }
    return g;
  }

  std::uint64_t spline_clamp_count = 0;

private:
  struct Node
  {
    Tensor value;
    std::vector<int> parents;
    BackwardFn backward;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  bool ran_backward_ = false;
};

inline const Tensor & Var::value() const { return tape_->val(id_); }

namespace detail
{

inline void check_same_tape(const Var & a, const Var & b, const char * op)
{
  if (a.tape() != b.tape()) {
    throw ContractError(std::string(op) + ": operands recorded on different tapes");
  }
}

/// True when `small` is a suffix of `big` (broadcast over leading dims).
inline bool is_suffix_shape(const std::vector<int> & big, const std::vector<int> & small)
{
  if (small.size() > big.size()) {
    return false;
  }
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary operations (same shape, or right operand broadcast over
// the leading batch dimension).
// ---------------------------------------------------------------------------

namespace detail
{

template <typename Fwd, typename BwdA, typename BwdB>
Var binary_broadcast(
  const Var & a, const Var & b, const char * name, Fwd fwd, BwdA bwd_a, BwdB bwd_b)
{
  check_same_tape(a, b, name);
  Tape & tape = *a.tape();
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  if (!av.same_shape(bv) && !is_suffix_shape(av.shape, bv.shape)) {
    throw ShapeError(
      std::string(name) + ": shapes " + shape_str(av.shape) + " and " + shape_str(bv.shape) +
      " are not compatible");
  }
  const std::size_t nb = static_cast<std::size_t>(bv.numel());
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.data.size(); ++i) {
    out.data[i] = fwd(av.data[i], bv.data[i % nb]);
  }
  const int aid = a.id();
  const int bid = b.id();
  return tape.push(
    std::move(out), {aid, bid}, [aid, bid, nb, bwd_a, bwd_b](Tape & t, int self) {
      const Tensor & g = t.out_grad(self);
      const Tensor & av2 = t.val(aid);
      const Tensor & bv2 = t.val(bid);
      if (t.needs_grad(aid)) {
        Tensor & ga = t.grad_slot(aid);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          ga.data[i] += bwd_a(g.data[i], av2.data[i], bv2.data[i % nb]);
        }
      }
      if (t.needs_grad(bid)) {
        Tensor & gb = t.grad_slot(bid);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          gb.data[i % nb] += bwd_b(g.data[i], av2.data[i], bv2.data[i % nb]);
        }
      }
    });
}

}  // namespace detail

inline Var add(const Var & a, const Var & b)
{
  return detail::binary_broadcast(
    a, b, "add", [](double x, double y) { return x + y; },
    [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

inline Var sub(const Var & a, const Var & b)
{
  return detail::binary_broadcast(
    a, b, "sub", [](double x, double y) { return x - y; },
    [](double g, double, double) { return g; }, [](double g, double, double) { return -g; });
}

inline Var mul(const Var & a, const Var & b)
{
  return detail::binary_broadcast(
    a, b, "mul", [](double x, double y) { return x * y; },
    [](double g, double, double y) { return g * y; },
    [](double g, double x, double) { return g * x; });
}

inline Var operator+(const Var & a, const Var & b) { return add(a, b); }
inline Var operator-(const Var & a, const Var & b) { return sub(a, b); }
inline Var operator*(const Var & a, const Var & b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// Elementwise unary operations.
// ---------------------------------------------------------------------------

namespace detail
{

template <typename Fwd, typename Bwd>
Var unary(const Var & a, Fwd fwd, Bwd bwd)
{
  Tape & tape = *a.tape();
  const Tensor & av = a.value();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.data.size(); ++i) {
    out.data[i] = fwd(av.data[i]);
  }
  const int aid = a.id();
  return tape.push(std::move(out), {aid}, [aid, bwd](Tape & t, int self) {
    if (!t.needs_grad(aid)) {
      return;
    }
    const Tensor & g = t.out_grad(self);
    const Tensor & x = t.val(aid);
    const Tensor & y = t.val(self);
    Tensor & ga = t.grad_slot(aid);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      ga.data[i] += bwd(g.data[i], x.data[i], y.data[i]);
    }
  });
}

}  // namespace detail

inline Var scale(const Var & a, double c)
{
  return detail::unary(
    a, [c](double x) { return c * x; }, [c](double g, double, double) { return c * g; });
}

inline Var div_scalar(const Var & a, double c)
{
  if (c == 0.0) {
    throw ContractError("div_scalar: division by zero");
  }
  return scale(a, 1.0 / c);
}

inline Var neg(const Var & a) { return scale(a, -1.0); }
inline Var operator-(const Var & a) { return neg(a); }

inline Var add_scalar(const Var & a, double c)
{
  return detail::unary(
    a, [c](double x) { return x + c; }, [](double g, double, double) { return g; });
}

inline Var sigmoid(const Var & a)
{
  return detail::unary(
    a,
    [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
    [](double g, double, double y) { return g * y * (1.0 - y); });
}

inline Var tanh(const Var & a)
{
  return detail::unary(
    a, [](double x) { return std::tanh(x); },
    [](double g, double, double y) { return g * (1.0 - y * y); });
}

inline Var relu(const Var & a)
{
  return detail::unary(
    a, [](double x) { return x > 0.0 ? x : 0.0; },
    [](double g, double x, double) { return x > 0.0 ? g : 0.0; });
}

/// Square root; callers guard the domain (add an epsilon before the call
/// when the argument can reach zero).
inline Var sqrt(const Var & a)
{
  for (double v : a.value().data) {
    if (v < 0.0) {
      throw ContractError("sqrt: negative input");
    }
  }
  return detail::unary(
    a, [](double x) { return std::sqrt(x); },
    [](double g, double, double y) { return 0.5 * g / y; });
}

inline Var log(const Var & a)
{
  for (double v : a.value().data) {
    if (v <= 0.0) {
      throw ContractError("log: non-positive input");
    }
  }
  return detail::unary(
    a, [](double x) { return std::log(x); },
    [](double g, double x, double) { return g / x; });
}

inline Var square(const Var & a) { return mul(a, a); }

// ---------------------------------------------------------------------------
// Matrix product.
// ---------------------------------------------------------------------------

inline Var matmul(const Var & a, const Var & b)
{
  detail::check_same_tape(a, b, "matmul");
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2) {
    throw ShapeError(
      "matmul: expects rank-2 operands, got " + shape_str(av.shape) + " and " +
      shape_str(bv.shape));
  }
  if (av.shape[1] != bv.shape[0]) {
    throw ShapeError(
      "matmul: inner dimensions disagree: " + shape_str(av.shape) + " x " + shape_str(bv.shape));
  }
  const int m = av.shape[0];
  const int k = av.shape[1];
  const int n = bv.shape[1];
  Tensor out = Tensor::zeros({m, n});
  detail::mm(av.data.data(), bv.data.data(), out.data.data(), m, k, n);
  const int aid = a.id();
  const int bid = b.id();
  return a.tape()->push(std::move(out), {aid, bid}, [aid, bid, m, k, n](Tape & t, int self) {
    const Tensor & g = t.out_grad(self);
    if (t.needs_grad(aid)) {
      // dA += G * B^T
      detail::mm_nt_acc(g.data.data(), t.val(bid).data.data(), t.grad_slot(aid).data.data(), m, n, k);
    }
    if (t.needs_grad(bid)) {
      // dB += A^T * G
      detail::mm_tn_acc(t.val(aid).data.data(), g.data.data(), t.grad_slot(bid).data.data(), m, k, n);
    }
  });
}

inline Var transpose(const Var & a)
{
  const Tensor & av = a.value();
  if (av.rank() != 2) {
    throw ShapeError("transpose: expects rank-2 operand, got " + shape_str(av.shape));
  }
  const int m = av.shape[0];
  const int n = av.shape[1];
  Tensor out = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      out.at(j, i) = av.at(i, j);
    }
  }
  const int aid = a.id();
  return a.tape()->push(std::move(out), {aid}, [aid, m, n](Tape & t, int self) {
    if (!t.needs_grad(aid)) {
      return;
    }
    const Tensor & g = t.out_grad(self);
    Tensor & ga = t.grad_slot(aid);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        ga.at(i, j) += g.at(j, i);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Structure: concat, slice, gather.
// ---------------------------------------------------------------------------

inline Var concat(const std::vector<Var> & parts, int axis)
{
  if (parts.empty()) {
    throw ContractError("concat: no operands");
  }
  Tape & tape = *parts[0].tape();
  const int rank = parts[0].value().rank();
  if (axis < 0 || axis >= rank) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  for (const Var & p : parts) {
    detail::check_same_tape(parts[0], p, "concat");
    if (p.value().rank() != rank) {
      throw ShapeError("concat: mixed ranks");
    }
    for (int d = 0; d < rank; ++d) {
      if (d != axis && p.value().shape[d] != parts[0].value().shape[d]) {
        throw ShapeError(
          "concat: shapes " + shape_str(parts[0].value().shape) + " and " +
          shape_str(p.value().shape) + " disagree off-axis");
      }
    }
  }

  std::vector<int> out_shape = parts[0].value().shape;
  out_shape[axis] = 0;
  for (const Var & p : parts) {
    out_shape[axis] += p.value().shape[axis];
  }
  Tensor out = Tensor::zeros(out_shape);

  // Treat the tensor as (outer, axis_dim, inner).
  std::int64_t outer = 1;
  for (int d = 0; d < axis; ++d) {
    outer *= out_shape[d];
  }
  std::int64_t inner = 1;
  for (int d = axis + 1; d < rank; ++d) {
    inner *= out_shape[d];
  }
  const std::int64_t out_axis = out_shape[axis];

  std::vector<int> ids;
  std::vector<std::int64_t> offsets;
  std::int64_t off = 0;
  for (const Var & p : parts) {
    const Tensor & pv = p.value();
    const std::int64_t ax = pv.shape[axis];
    for (std::int64_t o = 0; o < outer; ++o) {
      const double * src = pv.data.data() + o * ax * inner;
      double * dst = out.data.data() + (o * out_axis + off) * inner;
      std::copy(src, src + ax * inner, dst);
    }
    ids.push_back(p.id());
    offsets.push_back(off);
    off += ax;
  }

  return tape.push(
    std::move(out), ids,
    [ids, offsets, outer, inner, out_axis](Tape & t, int self) {
      const Tensor & g = t.out_grad(self);
      for (std::size_t pi = 0; pi < ids.size(); ++pi) {
        if (!t.needs_grad(ids[pi])) {
          continue;
        }
        Tensor & gp = t.grad_slot(ids[pi]);
        const std::int64_t ax = gp.numel() / (outer * inner);
        for (std::int64_t o = 0; o < outer; ++o) {
          const double * src = g.data.data() + (o * out_axis + offsets[pi]) * inner;
          double * dst = gp.data.data() + o * ax * inner;
          for (std::int64_t i = 0; i < ax * inner; ++i) {
            dst[i] += src[i];
          }
        }
      }
    });
}

inline Var slice(const Var & a, int axis, int start, int len)
{
  const Tensor & av = a.value();
  const int rank = av.rank();
  if (axis < 0 || axis >= rank) {
    throw ShapeError("slice: axis " + std::to_string(axis) + " out of range");
  }
  if (start < 0 || len <= 0 || start + len > av.shape[axis]) {
    throw ShapeError(
      "slice: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
      ") out of bounds for axis " + std::to_string(axis) + " of " + shape_str(av.shape));
  }
  std::vector<int> out_shape = av.shape;
  out_shape[axis] = len;
  std::int64_t outer = 1;
  for (int d = 0; d < axis; ++d) {
    outer *= av.shape[d];
  }
  std::int64_t inner = 1;
  for (int d = axis + 1; d < rank; ++d) {
    inner *= av.shape[d];
  }
  const std::int64_t in_axis = av.shape[axis];

  Tensor out = Tensor::zeros(out_shape);
  for (std::int64_t o = 0; o < outer; ++o) {
    const double * src = av.data.data() + (o * in_axis + start) * inner;
    double * dst = out.data.data() + o * len * inner;
    std::copy(src, src + len * inner, dst);
  }
  const int aid = a.id();
  return a.tape()->push(
    std::move(out), {aid}, [aid, start, len, outer, inner, in_axis](Tape & t, int self) {
      if (!t.needs_grad(aid)) {
        return;
      }
      const Tensor & g = t.out_grad(self);
      Tensor & ga = t.grad_slot(aid);
      for (std::int64_t o = 0; o < outer; ++o) {
        const double * src = g.data.data() + o * len * inner;
        double * dst = ga.data.data() + (o * in_axis + start) * inner;
        for (std::int64_t i = 0; i < len * inner; ++i) {
          dst[i] += src[i];
        }
      }
    });
}

/// Row gather from a rank-2 tensor; doubles as embedding lookup. Duplicate
/// indices accumulate gradient.
inline Var gather_rows(const Var & a, std::vector<int> indices)
{
  const Tensor & av = a.value();
  if (av.rank() != 2) {
    throw ShapeError("gather_rows: expects rank-2 operand, got " + shape_str(av.shape));
  }
  const int cols = av.shape[1];
  for (int idx : indices) {
    if (idx < 0 || idx >= av.shape[0]) {
      throw ShapeError(
        "gather_rows: index " + std::to_string(idx) + " out of range for " + shape_str(av.shape));
    }
  }
  Tensor out = Tensor::zeros({static_cast<int>(indices.size()), cols});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const double * src = av.data.data() + static_cast<std::size_t>(indices[r]) * cols;
    std::copy(src, src + cols, out.data.data() + r * cols);
  }
  const int aid = a.id();
  return a.tape()->push(
    std::move(out), {aid}, [aid, indices, cols](Tape & t, int self) {
      if (!t.needs_grad(aid)) {
        return;
      }
      const Tensor & g = t.out_grad(self);
      Tensor & ga = t.grad_slot(aid);
      for (std::size_t r = 0; r < indices.size(); ++r) {
        const double * src = g.data.data() + r * cols;
        double * dst = ga.data.data() + static_cast<std::size_t>(indices[r]) * cols;
        for (int j = 0; j < cols; ++j) {
          dst[j] += src[j];
        }
      }
    });
}

/// Embedding lookup: rows of `table` selected by `ids`.
inline Var embedding(const Var & table, const std::vector<int> & ids)
{
  return gather_rows(table, ids);
}

// ---------------------------------------------------------------------------
// Reductions.
// ---------------------------------------------------------------------------

namespace detail
{

inline Var reduce(const Var & a, int axis, bool take_mean)
{
  const Tensor & av = a.value();
  const int rank = av.rank();
  if (axis < 0 || axis >= rank) {
    throw ShapeError("reduce: axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  std::int64_t outer = 1;
  for (int d = 0; d < axis; ++d) {
    outer *= av.shape[d];
  }
  std::int64_t inner = 1;
  for (int d = axis + 1; d < rank; ++d) {
    inner *= av.shape[d];
  }
  const std::int64_t ax = av.shape[axis];

  std::vector<int> out_shape;
  for (int d = 0; d < rank; ++d) {
    if (d != axis) {
      out_shape.push_back(av.shape[d]);
    }
  }
  if (out_shape.empty()) {
    out_shape.push_back(1);
  }
  Tensor out = Tensor::zeros(out_shape);
  const double w = take_mean ? 1.0 / static_cast<double>(ax) : 1.0;
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t k = 0; k < ax; ++k) {
      const double * src = av.data.data() + (o * ax + k) * inner;
      double * dst = out.data.data() + o * inner;
      for (std::int64_t i = 0; i < inner; ++i) {
        dst[i] += w * src[i];
      }
    }
  }
  const int aid = a.id();
  return a.tape()->push(
    std::move(out), {aid}, [aid, outer, inner, ax, w](Tape & t, int self) {
      if (!t.needs_grad(aid)) {
        return;
      }
      const Tensor & g = t.out_grad(self);
      Tensor & ga = t.grad_slot(aid);
      for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t k = 0; k < ax; ++k) {
          const double * src = g.data.data() + o * inner;
          double * dst = ga.data.data() + (o * ax + k) * inner;
          for (std::int64_t i = 0; i < inner; ++i) {
            dst[i] += w * src[i];
          }
        }
      }
    });
}

}  // namespace detail

inline Var sum(const Var & a, int axis) { return detail::reduce(a, axis, false); }
inline Var mean(const Var & a, int axis) { return detail::reduce(a, axis, true); }

inline Var sum_all(const Var & a)
{
  Var r = a;
  while (r.value().rank() > 1 || r.value().numel() > 1) {
    r = sum(r, 0);
    if (r.value().rank() == 1 && r.value().numel() == 1) {
      break;
    }
  }
  return r;
}

inline Var mean_all(const Var & a)
{
  const double n = static_cast<double>(a.value().numel());
  return div_scalar(sum_all(a), n);
}

// ---------------------------------------------------------------------------
// Softmax and layer normalization.
// ---------------------------------------------------------------------------

/// Numerically stable softmax along `axis` (max subtraction per slice).
inline Var softmax(const Var & a, int axis)
{
  const Tensor & av = a.value();
  const int rank = av.rank();
  if (axis < 0 || axis >= rank) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  std::int64_t outer = 1;
  for (int d = 0; d < axis; ++d) {
    outer *= av.shape[d];
  }
  std::int64_t inner = 1;
  for (int d = axis + 1; d < rank; ++d) {
    inner *= av.shape[d];
  }
  const std::int64_t ax = av.shape[axis];

  Tensor out = Tensor::zeros(av.shape);
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t i = 0; i < inner; ++i) {
      double mx = -HUGE_VAL;
      for (std::int64_t k = 0; k < ax; ++k) {
        mx = std::max(mx, av.data[(o * ax + k) * inner + i]);
      }
      double z = 0.0;
      for (std::int64_t k = 0; k < ax; ++k) {
        const double e = std::exp(av.data[(o * ax + k) * inner + i] - mx);
        out.data[(o * ax + k) * inner + i] = e;
        z += e;
      }
      for (std::int64_t k = 0; k < ax; ++k) {
        out.data[(o * ax + k) * inner + i] /= z;
      }
    }
  }
  const int aid = a.id();
  return a.tape()->push(
    std::move(out), {aid}, [aid, outer, inner, ax](Tape & t, int self) {
      if (!t.needs_grad(aid)) {
        return;
      }
      const Tensor & g = t.out_grad(self);
      const Tensor & y = t.val(self);
      Tensor & ga = t.grad_slot(aid);
      for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t i = 0; i < inner; ++i) {
          double dot = 0.0;
          for (std::int64_t k = 0; k < ax; ++k) {
            const std::int64_t idx = (o * ax + k) * inner + i;
            dot += g.data[idx] * y.data[idx];
          }
          for (std::int64_t k = 0; k < ax; ++k) {
            const std::int64_t idx = (o * ax + k) * inner + i;
            ga.data[idx] += y.data[idx] * (g.data[idx] - dot);
          }
        }
      }
    });
}

/// Normalizes the last axis of each row to zero mean and unit variance.
/// Affine parameters, when wanted, are composed outside.
inline Var layer_norm(const Var & a, double eps = 1e-5)
{
  const Tensor & av = a.value();
  const int rank = av.rank();
  const std::int64_t d = av.shape[rank - 1];
  const std::int64_t rows = av.numel() / d;

  Tensor out = Tensor::zeros(av.shape);
  std::vector<double> inv_std(static_cast<std::size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const double * x = av.data.data() + r * d;
    double mu = 0.0;
    for (std::int64_t i = 0; i < d; ++i) {
      mu += x[i];
    }
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::int64_t i = 0; i < d; ++i) {
      var += (x[i] - mu) * (x[i] - mu);
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = inv;
    double * y = out.data.data() + r * d;
    for (std::int64_t i = 0; i < d; ++i) {
      y[i] = (x[i] - mu) * inv;
    }
  }
  const int aid = a.id();
  return a.tape()->push(
    std::move(out), {aid}, [aid, rows, d, inv_std](Tape & t, int self) {
      if (!t.needs_grad(aid)) {
        return;
      }
      const Tensor & g = t.out_grad(self);
      const Tensor & y = t.val(self);
      Tensor & ga = t.grad_slot(aid);
      for (std::int64_t r = 0; r < rows; ++r) {
        const double * gr = g.data.data() + r * d;
        const double * yr = y.data.data() + r * d;
        double * dr = ga.data.data() + r * d;
        double mean_g = 0.0;
        double mean_gy = 0.0;
        for (std::int64_t i = 0; i < d; ++i) {
          mean_g += gr[i];
          mean_gy += gr[i] * yr[i];
        }
        mean_g /= static_cast<double>(d);
        mean_gy /= static_cast<double>(d);
        const double inv = inv_std[static_cast<std::size_t>(r)];
        for (std::int64_t i = 0; i < d; ++i) {
          dr[i] += inv * (gr[i] - mean_g - yr[i] * mean_gy);
        }
      }
    });
}

// ---------------------------------------------------------------------------
// B-spline basis (KAN support).
// ---------------------------------------------------------------------------

/// Uniform knot grid for order-k B-splines over [lo, hi] with G intervals.
/// k extra knots extend each side, giving G + k basis functions; the basis
/// sums to one everywhere inside [lo, hi].
struct BSplineGrid
{
  int intervals = 8;
  int order = 3;
  double lo = -3.0;
  double hi = 3.0;
  std::vector<double> knots;

  static BSplineGrid uniform(int intervals, int order, double lo, double hi)
  {
    if (intervals < 1 || order < 1 || !(lo < hi)) {
      throw ConfigError("spline grid: need intervals >= 1, order >= 1, lo < hi");
    }
    BSplineGrid g;
    g.intervals = intervals;
    g.order = order;
    g.lo = lo;
    g.hi = hi;
    const double h = (hi - lo) / intervals;
    g.knots.resize(static_cast<std::size_t>(intervals + 2 * order + 1));
    for (int i = 0; i < static_cast<int>(g.knots.size()); ++i) {
      g.knots[static_cast<std::size_t>(i)] = lo + (i - order) * h;
    }
    return g;
  }

  int num_basis() const { return intervals + order; }

  double clamp(double x) const { return std::min(hi, std::max(lo, x)); }
  bool clamps(double x) const { return x < lo || x > hi; }

  int find_span(double x) const
  {
    const int k = order;
    const int last = intervals + k - 1;
    if (x >= hi) {
      return last;
    }
    if (x <= lo) {
      return k;
    }
    int j = k + static_cast<int>((x - lo) / ((hi - lo) / intervals));
    j = std::min(j, last);
    while (j > k && x < knots[static_cast<std::size_t>(j)]) {
      --j;
    }
    while (j < last && x >= knots[static_cast<std::size_t>(j + 1)]) {
      ++j;
    }
    return j;
  }

  // Values of the degree-`deg` basis functions that are nonzero on `span`,
  // written to vals[0..deg]; vals[r] is basis index span - deg + r.
  void basis_at_span(int span, int deg, double x, double * vals) const
  {
    vals[0] = 1.0;
    std::vector<double> left(static_cast<std::size_t>(deg + 1));
    std::vector<double> right(static_cast<std::size_t>(deg + 1));
    for (int j = 1; j <= deg; ++j) {
      left[static_cast<std::size_t>(j)] = x - knots[static_cast<std::size_t>(span + 1 - j)];
      right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(span + j)] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
        const double temp = vals[r] / denom;
        vals[r] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
        saved = left[static_cast<std::size_t>(j - r)] * temp;
      }
      vals[j] = saved;
    }
  }

  /// Fills `row` (length num_basis()) with all basis values at clamp(x).
  void basis_row(double x, double * row) const
  {
    std::fill(row, row + num_basis(), 0.0);
    const double xc = clamp(x);
    const int span = find_span(xc);
    std::vector<double> vals(static_cast<std::size_t>(order + 1));
    basis_at_span(span, order, xc, vals.data());
    for (int r = 0; r <= order; ++r) {
      row[span - order + r] = vals[static_cast<std::size_t>(r)];
    }
  }

  /// d/dx of every basis function at x; zero when x is outside [lo, hi]
  /// (the clamped input is constant there).
  void basis_deriv_row(double x, double * row) const
  {
    std::fill(row, row + num_basis(), 0.0);
    if (clamps(x)) {
      return;
    }
    const int k = order;
    const int span = find_span(x);
    // Degree k-1 basis values nonzero on the span: indices span-k+1 .. span.
    std::vector<double> lower(static_cast<std::size_t>(k));
    basis_at_span(span, k - 1, x, lower.data());
    auto lower_val = [&](int i) -> double {
      const int r = i - (span - k + 1);
      return (r >= 0 && r < k) ? lower[static_cast<std::size_t>(r)] : 0.0;
    };
    for (int i = span - k; i <= span; ++i) {
      const double t_i = knots[static_cast<std::size_t>(i)];
      const double t_ik = knots[static_cast<std::size_t>(i + k)];
      const double t_i1 = knots[static_cast<std::size_t>(i + 1)];
      const double t_ik1 = knots[static_cast<std::size_t>(i + k + 1)];
      double v = 0.0;
      if (t_ik > t_i) {
        v += lower_val(i) / (t_ik - t_i);
      }
      if (t_ik1 > t_i1) {
        v -= lower_val(i + 1) / (t_ik1 - t_i1);
      }
      row[i] = k * v;
    }
  }
};

/// B-spline basis matrix for a vector input: row i holds the basis values at
/// x[i]. Inputs outside the grid are clamped (counted on the tape).
inline Var spline_basis(const Var & x, const BSplineGrid & grid)
{
  const Tensor & xv = x.value();
  if (xv.rank() != 1) {
    throw ShapeError("spline_basis: expects rank-1 input, got " + shape_str(xv.shape));
  }
  const int n = xv.shape[0];
  const int nb = grid.num_basis();
  Tensor out = Tensor::zeros({n, nb});
  std::uint64_t clamped = 0;
  for (int i = 0; i < n; ++i) {
    if (grid.clamps(xv.data[static_cast<std::size_t>(i)])) {
      ++clamped;
    }
    grid.basis_row(xv.data[static_cast<std::size_t>(i)], out.data.data() + static_cast<std::size_t>(i) * nb);
  }
  Tape & tape = *x.tape();
  tape.spline_clamp_count += clamped;
  const int xid = x.id();
  return tape.push(std::move(out), {xid}, [xid, grid, n, nb](Tape & t, int self) {
    if (!t.needs_grad(xid)) {
      return;
    }
    const Tensor & g = t.out_grad(self);
    const Tensor & xv2 = t.val(xid);
    Tensor & gx = t.grad_slot(xid);
    std::vector<double> deriv(static_cast<std::size_t>(nb));
    for (int i = 0; i < n; ++i) {
      grid.basis_deriv_row(xv2.data[static_cast<std::size_t>(i)], deriv.data());
      double acc = 0.0;
      const double * grow = g.data.data() + static_cast<std::size_t>(i) * nb;
      for (int m = 0; m < nb; ++m) {
        acc += grow[m] * deriv[static_cast<std::size_t>(m)];
      }
      gx.data[static_cast<std::size_t>(i)] += acc;
    }
  });
}

/// x * sigmoid(x); the KAN base activation.
inline Var silu(const Var & x) { return mul(x, sigmoid(x)); }

// ---------------------------------------------------------------------------
// Gradient verification.
// ---------------------------------------------------------------------------

/// Checks the tape gradient of a scalar-valued function against central
/// finite differences. Returns max over coordinates of
/// |analytic - numeric| / max(1, |analytic|).
inline double grad_check(
  const std::function<Var(Tape &, const Var &)> & f, const Tensor & x, double step = 1e-5)
{
  if (step <= 0.0) {
    throw ContractError("grad_check: step must be positive");
  }
  Tensor analytic;
  {
    Tape tape;
    Tensor xt = x;
    xt.requires_grad = true;
    Var xv = tape.leaf(std::move(xt));
    Var loss = f(tape, xv);
    tape.backward(loss);
    analytic = tape.grad(xv);
  }
  auto eval = [&](const Tensor & at) {
    Tape tape;
    Tensor xt = at;
    xt.requires_grad = false;
    Var xv = tape.leaf(std::move(xt));
    return f(tape, xv).value().data[0];
  };
  double max_rel = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < probe.data.size(); ++i) {
    const double orig = probe.data[i];
    probe.data[i] = orig + step;
    const double up = eval(probe);
    probe.data[i] = orig - step;
    const double down = eval(probe);
    probe.data[i] = orig;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.data[i];
    const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace dmtp

#endif  // DMTP_TAPE_HPP_

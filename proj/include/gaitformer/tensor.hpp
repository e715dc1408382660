// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitformer {

using Shape = std::vector<std::size_t>;

/// Raised when operand shapes violate an operation's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by a tape in checked mode when an operation produces NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major f64 array. Dimensions are strictly positive; a scalar is
/// represented with shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  bool empty() const { return data_.empty(); }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Value of a single-element tensor.
  double item() const;
  bool all_finite() const;

  /// Same buffer under a new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
/// that produced it is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order,
/// so the node list is already a topological order of the graph.
class Tape {
 public:
  /// Propagates the node's output gradient into its inputs' gradient buffers.
  using BackwardFn =
      std::function<void(Tape& tape, const Tensor& output, const Tensor& output_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is collected by backward().
  Var parameter(Tensor value);

  /// Records an operation result. `inputs` decides whether the node needs a
  /// gradient; `backward` may be empty for non-differentiable results.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs,
             BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id()).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }

  /// Gradient buffer of `v` after backward(); zeros when `v` was unreachable.
  Tensor grad(Var v) const;

  /// Accumulates into the gradient buffer of `v` (allocated on first use).
  /// Used by backward functions; a no-op for nodes that need no gradient.
  Tensor* grad_buffer(Var v);

  /// Computes d(root)/d(node) for every node reachable from a single-element
  /// root. Gradients from a previous call are discarded first, so repeated
  /// calls produce identical buffers.
  void backward(Var root);

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  /// Checked mode: every recorded value is tested for NaN/Inf.
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  struct Node {
    const char* op;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(const char* op, Tensor value, bool requires_grad, BackwardFn backward);

  // deque: references to node values stay valid as nodes are appended.
  std::deque<Node> nodes_;
  bool check_finite_ = false;
};

// Differentiable operations. Operands must live on the same tape.

/// Matrix product over the last two dimensions. Leading (batch) dimensions
/// must agree, or one operand must be a plain matrix that is shared across
/// the other's batch.
Var matmul(Var a, Var b);

/// Swaps the last two dimensions.
Var transpose(Var x);
Var reshape(Var x, Shape shape);

/// (..., tokens, C) -> (..., heads, tokens, C / heads).
Var split_heads(Var x, std::size_t heads);
/// Inverse of split_heads: (..., heads, tokens, c) -> (..., tokens, heads * c).
Var merge_heads(Var x);
/// (..., T, N, D) -> (..., T, N * D), joint-major within a frame.
Var flatten_frames(Var x);

Var softmax(Var x, std::size_t axis);
/// Normalizes each slice along the last dimension with biased variance.
Var layer_norm(Var x, Var gamma, Var beta, double eps);

// Elementwise binary ops accept equal shapes, or `b` whose shape (ignoring
// leading 1s) is a trailing suffix of `a`'s shape; `b` is then replicated.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var relu(Var x);
/// Exact (erf-based) GELU.
Var gelu(Var x);

/// x: (..., T, M), w: (T) -> (B, M) where B is the product of the leading
/// dimensions (1 when x is a plain T x M matrix).
Var weighted_frame_sum(Var x, Var w);

/// Mean squared error over all elements; returns shape {1}.
Var mse_loss(Var pred, Var target);

/// x @ weight + bias.
Var linear(Var x, Var weight, Var bias);

}  // namespace gaitformer

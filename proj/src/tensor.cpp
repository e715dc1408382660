// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace gaitformer {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) { return fmt::format("[{}]", fmt::join(shape, "x")); }

namespace {

void check_dims(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimension sizes must be positive, got " + to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_.assign(numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  check_dims(shape_);
  if (numel(shape_) != data_.size()) {
    throw ShapeError(fmt::format("shape {} needs {} values, got {}", to_string(shape_),
                                 numel(shape_), data_.size()));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw ShapeError(fmt::format("cannot reshape {} into {}: element count mismatch",
                                 to_string(shape_), to_string(shape)));
  }
  return Tensor(std::move(shape), data_);
}

const Tensor& Var::value() const { return tape_->value(*this); }

Var Tape::push(const char* op, Tensor value, bool requires_grad, BackwardFn backward) {
  if (check_finite_ && !value.all_finite()) {
    throw NonFiniteError(fmt::format("non-finite value produced by '{}' (node {})", op,
                                     nodes_.size()));
  }
  nodes_.push_back(Node{op, std::move(value), Tensor{}, requires_grad, std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push("constant", std::move(value), false, {}); }

Var Tape::parameter(Tensor value) { return push("parameter", std::move(value), true, {}); }

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  bool needs_grad = false;
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw std::logic_error(fmt::format("'{}': operand from another tape", op));
    needs_grad = needs_grad || nodes_.at(in.id()).requires_grad;
  }
  if (!needs_grad) backward = nullptr;
  return push(op, std::move(value), needs_grad, std::move(backward));
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_.at(v.id());
  if (node.grad.empty()) return Tensor(node.value.shape());
  return node.grad;
}

Tensor* Tape::grad_buffer(Var v) {
  Node& node = nodes_.at(v.id());
  if (!node.requires_grad) return nullptr;
  if (node.grad.empty()) node.grad = Tensor(node.value.shape());
  return &node.grad;
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw std::logic_error("backward: root belongs to another tape");
  const Node& root_node = nodes_.at(root.id());
  if (root_node.value.size() != 1) {
    throw ShapeError("backward requires a single-element root, got shape " +
                     to_string(root_node.value.shape()));
  }
  for (Node& node : nodes_) node.grad = Tensor{};
  if (!root_node.requires_grad) return;

  nodes_[root.id()].grad = Tensor(root_node.value.shape(), 1.0);
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty() || !node.backward) continue;
    // Backward functions only write to buffers of earlier nodes.
    node.backward(*this, node.value, node.grad);
  }
}

}  // namespace gaitformer

// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitformer/model_config.hpp"
#include "gaitformer/tensor.hpp"

namespace gaitformer {

// Parameter containers are templated on the leaf type so the same layout
// holds weights (Tensor), their tape bindings (Var), gradients and optimizer
// moments.

template <class T>
struct BasicLinear {
  T weight;  // in x out
  T bias;    // out
};

template <class T>
struct BasicLayerNorm {
  T gamma;
  T beta;
};

template <class T>
struct BasicEncoderLayer {
  BasicLayerNorm<T> norm1;
  BasicLinear<T> query;
  BasicLinear<T> key;
  BasicLinear<T> value;
  BasicLinear<T> out;
  BasicLayerNorm<T> norm2;
  BasicLinear<T> mlp_in;
  BasicLinear<T> mlp_out;
};

template <class T>
struct BasicAttentionBlock {
  std::vector<BasicEncoderLayer<T>> layers;
  BasicLayerNorm<T> final_norm;
};

template <class T>
struct BasicModelParams {
  BasicLinear<T> joint_embedding;  // 2 -> D
  T spatial_position;              // 1 x N x D
  BasicAttentionBlock<T> spatial;  // width D
  T temporal_position;             // T x (N*D)
  BasicAttentionBlock<T> temporal; // width N*D
  T frame_weights;                 // T
  BasicLinear<T> head_hidden;      // N*D -> head_hidden
  BasicLinear<T> head_out;         // head_hidden -> 1
};

using ModelParams = BasicModelParams<Tensor>;

namespace detail {

template <class F, class... P>
void visit_linear(const std::string& name, F& f, P&... p) {
  f(name + ".weight", p.weight...);
  f(name + ".bias", p.bias...);
}

template <class F, class... P>
void visit_norm(const std::string& name, F& f, P&... p) {
  f(name + ".gamma", p.gamma...);
  f(name + ".beta", p.beta...);
}

template <class F, class... P>
void visit_layer(const std::string& name, F& f, P&... p) {
  visit_norm(name + ".norm1", f, p.norm1...);
  visit_linear(name + ".query", f, p.query...);
  visit_linear(name + ".key", f, p.key...);
  visit_linear(name + ".value", f, p.value...);
  visit_linear(name + ".out", f, p.out...);
  visit_norm(name + ".norm2", f, p.norm2...);
  visit_linear(name + ".mlp_in", f, p.mlp_in...);
  visit_linear(name + ".mlp_out", f, p.mlp_out...);
}

template <class F, class First, class... P>
void visit_block(const std::string& name, F& f, First& first, P&... p) {
  if (((p.layers.size() != first.layers.size()) || ...)) {
    throw std::logic_error("parameter sets disagree on layer count in " + name);
  }
  for (std::size_t i = 0; i < first.layers.size(); ++i) {
    visit_layer(name + ".layers." + std::to_string(i), f, first.layers[i], p.layers[i]...);
  }
  visit_norm(name + ".final_norm", f, first.final_norm, p.final_norm...);
}

}  // namespace detail

/// Calls f(name, leaf...) for every parameter, walking several parameter
/// sets with the same layout in lockstep. The visiting order is fixed and
/// defines the serialization and initialization order.
template <class F, class... P>
void for_each_param(F&& f, P&... params) {
  detail::visit_linear("joint_embedding", f, params.joint_embedding...);
  f(std::string("spatial_position"), params.spatial_position...);
  detail::visit_block("spatial", f, params.spatial...);
  f(std::string("temporal_position"), params.temporal_position...);
  detail::visit_block("temporal", f, params.temporal...);
  f(std::string("frame_weights"), params.frame_weights...);
  detail::visit_linear("head_hidden", f, params.head_hidden...);
  detail::visit_linear("head_out", f, params.head_out...);
}

/// Container of the right layer counts with default-constructed leaves.
template <class T, class U>
BasicModelParams<T> same_layout(const BasicModelParams<U>& like) {
  BasicModelParams<T> out;
  out.spatial.layers.resize(like.spatial.layers.size());
  out.temporal.layers.resize(like.temporal.layers.size());
  return out;
}

/// Deterministic initialization for (config, seed): linear weights
/// U(-sqrt(1/fan_in), sqrt(1/fan_in)), biases 0, positional encodings
/// N(0, 0.02), LayerNorm gamma 1 / beta 0, frame weights 1/T.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Every tensor zero-filled with the shapes of `like`.
ModelParams zeros_like(const ModelParams& like);

/// Sum of element counts over all tensors.
std::size_t total_elements(const ModelParams& params);

/// Throws ShapeError if any tensor's shape disagrees with `config`.
void check_shapes(const ModelParams& params, const ModelConfig& config);

}  // namespace gaitformer

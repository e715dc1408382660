// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/model.hpp"

#include <cmath>

#include <fmt/format.h>

namespace gaitformer {

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const ShapeError& e) {
    throw ShapeError(fmt::format("{}: {}", name, e.what()));
  }
}

Var activate(Var x, Activation a) { return a == Activation::gelu ? gelu(x) : relu(x); }

Var apply(Var x, const BasicLinear<Var>& p) { return linear(x, p.weight, p.bias); }

Var normalize(Var x, const BasicLayerNorm<Var>& p, double eps) { return layer_norm(x, p.gamma, p.beta, eps); }

BoundParams bind(Tape& tape, const ModelParams& params, bool trainable) {
  BoundParams bound = same_layout<Var>(params);
  for_each_param(
      [&](const std::string&, const Tensor& t, Var& v) {
        v = trainable ? tape.parameter(t) : tape.constant(t);
      },
      params, bound);
  return bound;
}

}  // namespace

BoundParams bind_parameters(Tape& tape, const ModelParams& params) { return bind(tape, params, true); }

BoundParams bind_constants(Tape& tape, const ModelParams& params) { return bind(tape, params, false); }

ModelParams collect_gradients(const Tape& tape, const BoundParams& bound) {
  ModelParams grads = same_layout<Tensor>(bound);
  for_each_param([&](const std::string&, const Var& v, Tensor& g) { g = tape.grad(v); }, bound, grads);
  return grads;
}

Var embed_spatial(Var keypoints, const BoundParams& params, const ModelConfig& config) {
  const Shape& s = keypoints.shape();
  if (s.size() < 3 || s[s.size() - 3] != config.frames || s[s.size() - 2] != config.joints ||
      s.back() != 2) {
    throw ShapeError(fmt::format("embed_spatial: keypoints {} do not match (T={}, N={}, 2)",
                                 to_string(s), config.frames, config.joints));
  }
  return add(apply(keypoints, params.joint_embedding), params.spatial_position);
}

Var multi_head_attention(Var z, const BasicEncoderLayer<Var>& layer, const ModelConfig& config,
                         Tensor* attention) {
  const std::size_t width = z.shape().back();
  if (width % config.heads != 0) {
    throw ShapeError(fmt::format("multi_head_attention: width {} not divisible by {} heads", width,
                                 config.heads));
  }
  const std::size_t scale_dim = config.scale == AttentionScale::per_head ? width / config.heads : width;
  const Var q = split_heads(apply(z, layer.query), config.heads);
  const Var k = split_heads(apply(z, layer.key), config.heads);
  const Var v = split_heads(apply(z, layer.value), config.heads);
  const Var logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(scale_dim)));
  const Var weights = softmax(logits, logits.shape().size() - 1);
  if (attention) *attention = weights.value();
  return apply(merge_heads(matmul(weights, v)), layer.out);
}

namespace {

void capture(const Tensor& weights, const AttentionSink& sink, std::size_t layer) {
  const Shape& s = weights.shape();
  const std::size_t tokens = s.back();
  const std::size_t heads = s[s.size() - 3];
  const std::size_t groups = weights.size() / (heads * tokens * tokens);
  const std::size_t block_size = tokens * tokens;
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t h = 0; h < heads; ++h) {
      AttentionRecord record;
      record.block = sink.block;
      record.layer = layer;
      record.head = h;
      if (sink.block == AttentionBlockKind::spatial) {
        record.sample = g / sink.frames_per_sample;
        record.frame = g % sink.frames_per_sample;
      } else {
        record.sample = g;
      }
      const double* begin = weights.data() + (g * heads + h) * block_size;
      record.matrix = Tensor({tokens, tokens}, std::vector<double>(begin, begin + block_size));
      sink.records->push_back(std::move(record));
    }
  }
}

}  // namespace

Var attention_block(Var z, const BasicAttentionBlock<Var>& block, const ModelConfig& config,
                    const AttentionSink* sink) {
  for (std::size_t l = 0; l < block.layers.size(); ++l) {
    const auto& layer = block.layers[l];
    Tensor weights;
    const Var attended =
        multi_head_attention(normalize(z, layer.norm1, config.eps), layer, config,
                             sink && sink->records ? &weights : nullptr);
    if (sink && sink->records) capture(weights, *sink, l);
    const Var residual = add(attended, z);
    const Var mlp_source = config.mlp_input == MlpInput::paper ? z : residual;
    const Var hidden = activate(apply(normalize(mlp_source, layer.norm2, config.eps), layer.mlp_in),
                                config.activation);
    z = add(apply(hidden, layer.mlp_out), residual);
  }
  return normalize(z, block.final_norm, config.eps);
}

ForwardResult forward(Var keypoints, const BoundParams& params, const ModelConfig& config,
                      bool capture_attention) {
  const Shape& s = keypoints.shape();
  if (s.size() == 3) keypoints = reshape(keypoints, {1, s[0], s[1], s[2]});
  if (keypoints.shape().size() != 4) {
    throw ShapeError(fmt::format("forward: expected keypoints (B, T, N, 2), got {}", to_string(s)));
  }
  const std::size_t batch = keypoints.shape()[0];
  const std::size_t frames = config.frames;
  const std::size_t joints = config.joints;

  ForwardResult result;
  std::vector<AttentionRecord>* records = capture_attention ? &result.attention : nullptr;

  const Var embedded = stage("joint embedding", [&] { return embed_spatial(keypoints, params, config); });
  const Var spatial = stage("spatial block", [&] {
    const AttentionSink sink{AttentionBlockKind::spatial, frames, records};
    return attention_block(reshape(embedded, {batch * frames, joints, config.embed_dim}),
                           params.spatial, config, &sink);
  });
  const Var temporal = stage("temporal block", [&] {
    const Var tokens = flatten_frames(reshape(spatial, {batch, frames, joints, config.embed_dim}));
    const AttentionSink sink{AttentionBlockKind::temporal, 1, records};
    return attention_block(add(tokens, params.temporal_position), params.temporal, config, &sink);
  });
  result.prediction = stage("regression head", [&] {
    const Var pooled = weighted_frame_sum(temporal, params.frame_weights);
    const Var hidden = activate(apply(pooled, params.head_hidden), config.activation);
    return apply(hidden, params.head_out);
  });
  if (result.prediction.shape() != Shape{batch, 1}) {
    throw ShapeError(fmt::format("regression head: expected ({}, 1) output, got {}", batch,
                                 to_string(result.prediction.shape())));
  }
  return result;
}

Prediction predict(const ModelParams& params, const ModelConfig& config, const Tensor& keypoints,
                   bool capture_attention) {
  Tape tape;
  const BoundParams bound = bind_constants(tape, params);
  ForwardResult out = forward(tape.constant(keypoints), bound, config, capture_attention);
  return Prediction{out.prediction.value().item(), std::move(out.attention)};
}

std::vector<double> predict_batch(const ModelParams& params, const ModelConfig& config,
                                  const Tensor& batch) {
  Tape tape;
  const BoundParams bound = bind_constants(tape, params);
  const ForwardResult out = forward(tape.constant(batch), bound, config);
  const auto values = out.prediction.value().values();
  return {values.begin(), values.end()};
}

}  // namespace gaitformer

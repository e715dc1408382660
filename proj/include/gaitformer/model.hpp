// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gaitformer/model_config.hpp"
#include "gaitformer/model_params.hpp"
#include "gaitformer/tensor.hpp"

namespace gaitformer {

enum class AttentionBlockKind { spatial, temporal };

/// One head's attention matrix from one layer. Spatial matrices are N x N
/// and carry the frame they were computed for; temporal matrices are T x T.
struct AttentionRecord {
  AttentionBlockKind block = AttentionBlockKind::spatial;
  std::size_t layer = 0;
  std::size_t head = 0;
  std::optional<std::size_t> frame;
  std::size_t sample = 0;  // index within the forward batch
  Tensor matrix;
};

using BoundParams = BasicModelParams<Var>;

/// Records every tensor of `params` on `tape` as a gradient-collecting leaf.
BoundParams bind_parameters(Tape& tape, const ModelParams& params);
/// Records every tensor as a constant (inference without gradients).
BoundParams bind_constants(Tape& tape, const ModelParams& params);

/// Gradients of all bound parameters after tape.backward().
ModelParams collect_gradients(const Tape& tape, const BoundParams& bound);

/// Joint embedding: (..., T, N, 2) @ W_s + b_s + E_s -> (..., T, N, D).
Var embed_spatial(Var keypoints, const BoundParams& params, const ModelConfig& config);

/// Multi-head self-attention over the token axis of z (..., tokens, M).
/// When `attention` is non-null it receives the softmax weights with shape
/// (..., H, tokens, tokens).
Var multi_head_attention(Var z, const BasicEncoderLayer<Var>& layer, const ModelConfig& config,
                         Tensor* attention = nullptr);

/// Where captured attention matrices go and how to label them.
struct AttentionSink {
  AttentionBlockKind block;
  /// Frames per sample when the spatial block runs on (B*T, N, D) tokens.
  std::size_t frames_per_sample = 1;
  std::vector<AttentionRecord>* records = nullptr;
};

/// L pre-norm encoder layers followed by the block's final LayerNorm.
Var attention_block(Var z, const BasicAttentionBlock<Var>& block, const ModelConfig& config,
                    const AttentionSink* sink = nullptr);

struct ForwardResult {
  Var prediction;  // (B, 1)
  std::vector<AttentionRecord> attention;
};

/// Full network on keypoints shaped (T, N, 2) or (B, T, N, 2).
ForwardResult forward(Var keypoints, const BoundParams& params, const ModelConfig& config,
                      bool capture_attention = false);

struct Prediction {
  double value = 0.0;
  std::vector<AttentionRecord> attention;
};

/// Inference on one (T, N, 2) segment.
Prediction predict(const ModelParams& params, const ModelConfig& config, const Tensor& keypoints,
                   bool capture_attention = false);

/// Inference on a (B, T, N, 2) batch; one value per sample.
std::vector<double> predict_batch(const ModelParams& params, const ModelConfig& config,
                                  const Tensor& batch);

}  // namespace gaitformer

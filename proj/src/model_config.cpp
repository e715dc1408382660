// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/model_config.hpp"

#include <fmt/format.h>

namespace gaitformer {

void ModelConfig::validate() const {
  if (frames < 1) throw ConfigError("frames (T) must be >= 1");
  if (joints < 1) throw ConfigError("joints (N) must be >= 1");
  if (layers < 1) throw ConfigError("layers (L) must be >= 1");
  if (heads < 1) throw ConfigError("heads (H) must be >= 1");
  if (embed_dim < 1) throw ConfigError("embed_dim (D) must be >= 1");
  if (embed_dim % heads != 0) {
    throw ConfigError(fmt::format("embed_dim (D={}) must be divisible by heads (H={})", embed_dim, heads));
  }
  if (temporal_dim() % heads != 0) {
    throw ConfigError(fmt::format("N*D ({}) must be divisible by heads (H={})", temporal_dim(), heads));
  }
  if (mlp_ratio < 1) throw ConfigError("mlp_ratio must be >= 1");
  if (head_hidden < 1) throw ConfigError("head_hidden must be >= 1");
  if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
}

namespace {

// One pre-norm encoder layer of width w: two LayerNorms, Q/K/V/out
// projections and a two-layer MLP, all with biases.
std::size_t encoder_layer_params(std::size_t w, std::size_t ratio) {
  const std::size_t norms = 2 * (2 * w);
  const std::size_t attention = 4 * (w * w + w);
  const std::size_t hidden = ratio * w;
  const std::size_t mlp = (w * hidden + hidden) + (hidden * w + w);
  return norms + attention + mlp;
}

}  // namespace

std::size_t count_params(const ModelConfig& c) {
  const std::size_t d = c.embed_dim;
  const std::size_t m = c.temporal_dim();
  const std::size_t embedding = 2 * d + d + c.joints * d;
  const std::size_t spatial = c.layers * encoder_layer_params(d, c.mlp_ratio) + 2 * d;
  const std::size_t temporal = c.frames * m + c.layers * encoder_layer_params(m, c.mlp_ratio) + 2 * m;
  const std::size_t pooling = c.frames;
  const std::size_t head = (m * c.head_hidden + c.head_hidden) + (c.head_hidden + 1);
  return embedding + spatial + temporal + pooling + head;
}

std::string_view to_string(Activation a) { return a == Activation::gelu ? "gelu" : "relu"; }
std::string_view to_string(MlpInput m) { return m == MlpInput::paper ? "paper" : "standard"; }
std::string_view to_string(AttentionScale s) {
  return s == AttentionScale::per_head ? "per_head" : "full_dim";
}

Activation parse_activation(std::string_view text) {
  if (text == "gelu") return Activation::gelu;
  if (text == "relu") return Activation::relu;
  throw ConfigError(fmt::format("unknown activation '{}' (expected gelu or relu)", text));
}

MlpInput parse_mlp_input(std::string_view text) {
  if (text == "paper") return MlpInput::paper;
  if (text == "standard") return MlpInput::standard;
  throw ConfigError(fmt::format("unknown mlp_input '{}' (expected paper or standard)", text));
}

AttentionScale parse_attention_scale(std::string_view text) {
  if (text == "per_head") return AttentionScale::per_head;
  if (text == "full_dim") return AttentionScale::full_dim;
  throw ConfigError(fmt::format("unknown attention scale '{}' (expected per_head or full_dim)", text));
}

}  // namespace gaitformer

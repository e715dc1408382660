// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitformer {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Activation { gelu, relu };

/// Which normalized input feeds a layer's MLP branch. `paper` uses
/// LN2(z_prev), the layer input; `standard` uses LN2(z') after attention.
enum class MlpInput { paper, standard };

/// Attention logits are divided by sqrt(width / heads) (`per_head`) or by
/// sqrt(width) (`full_dim`).
enum class AttentionScale { per_head, full_dim };

struct ModelConfig {
  std::size_t frames = 124;       // T
  std::size_t joints = 4;         // N
  std::size_t embed_dim = 12;     // D
  std::size_t layers = 1;         // L, per attention block
  std::size_t heads = 2;          // H
  std::size_t mlp_ratio = 4;
  std::size_t head_hidden = 24;
  Activation activation = Activation::gelu;
  double eps = 1e-5;
  MlpInput mlp_input = MlpInput::paper;
  AttentionScale scale = AttentionScale::per_head;

  /// Width of a temporal token, N * D.
  std::size_t temporal_dim() const { return joints * embed_dim; }

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Closed-form number of learnable scalars for `config`.
std::size_t count_params(const ModelConfig& config);

std::string_view to_string(Activation a);
std::string_view to_string(MlpInput m);
std::string_view to_string(AttentionScale s);
Activation parse_activation(std::string_view text);
MlpInput parse_mlp_input(std::string_view text);
AttentionScale parse_attention_scale(std::string_view text);

}  // namespace gaitformer

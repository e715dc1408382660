// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/model_params.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace gaitformer {

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

BasicLinear<Shape> linear_shape(std::size_t in, std::size_t out) { return {{in, out}, {out}}; }

BasicAttentionBlock<Shape> block_shapes(std::size_t width, const ModelConfig& c) {
  BasicAttentionBlock<Shape> block;
  const std::size_t hidden = c.mlp_ratio * width;
  for (std::size_t l = 0; l < c.layers; ++l) {
    BasicEncoderLayer<Shape> layer;
    layer.norm1 = {{width}, {width}};
    layer.query = linear_shape(width, width);
    layer.key = linear_shape(width, width);
    layer.value = linear_shape(width, width);
    layer.out = linear_shape(width, width);
    layer.norm2 = {{width}, {width}};
    layer.mlp_in = linear_shape(width, hidden);
    layer.mlp_out = linear_shape(hidden, width);
    block.layers.push_back(layer);
  }
  block.final_norm = {{width}, {width}};
  return block;
}

BasicModelParams<Shape> param_shapes(const ModelConfig& c) {
  const std::size_t m = c.temporal_dim();
  BasicModelParams<Shape> s;
  s.joint_embedding = linear_shape(2, c.embed_dim);
  s.spatial_position = {1, c.joints, c.embed_dim};
  s.spatial = block_shapes(c.embed_dim, c);
  s.temporal_position = {c.frames, m};
  s.temporal = block_shapes(m, c);
  s.frame_weights = {c.frames};
  s.head_hidden = linear_shape(m, c.head_hidden);
  s.head_out = linear_shape(c.head_hidden, 1);
  return s;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const auto shapes = param_shapes(config);
  ModelParams params = same_layout<Tensor>(shapes);
  std::mt19937_64 rng(seed);
  for_each_param(
      [&](const std::string& name, const Shape& shape, Tensor& t) {
        t = Tensor(shape);
        if (ends_with(name, ".weight")) {
          const double bound = std::sqrt(1.0 / static_cast<double>(shape[0]));
          std::uniform_real_distribution<double> dist(-bound, bound);
          for (double& v : t.values()) v = dist(rng);
        } else if (ends_with(name, "_position")) {
          std::normal_distribution<double> dist(0.0, 0.02);
          for (double& v : t.values()) v = dist(rng);
        } else if (ends_with(name, ".gamma")) {
          t = Tensor(shape, 1.0);
        } else if (name == "frame_weights") {
          t = Tensor(shape, 1.0 / static_cast<double>(config.frames));
        }
      },
      shapes, params);
  return params;
}

ModelParams zeros_like(const ModelParams& like) {
  ModelParams out = same_layout<Tensor>(like);
  for_each_param([](const std::string&, const Tensor& src, Tensor& dst) { dst = Tensor(src.shape()); },
                 like, out);
  return out;
}

std::size_t total_elements(const ModelParams& params) {
  std::size_t total = 0;
  for_each_param([&](const std::string&, const Tensor& t) { total += t.size(); }, params);
  return total;
}

void check_shapes(const ModelParams& params, const ModelConfig& config) {
  const auto shapes = param_shapes(config);
  if (params.spatial.layers.size() != config.layers || params.temporal.layers.size() != config.layers) {
    throw ShapeError(fmt::format("parameters have {}/{} layers, config expects {}",
                                 params.spatial.layers.size(), params.temporal.layers.size(),
                                 config.layers));
  }
  for_each_param(
      [](const std::string& name, const Shape& expected, const Tensor& t) {
        if (t.shape() != expected) {
          throw ShapeError(fmt::format("parameter {} has shape {}, config expects {}", name,
                                       to_string(t.shape()), to_string(expected)));
        }
      },
      shapes, params);
}

}  // namespace gaitformer

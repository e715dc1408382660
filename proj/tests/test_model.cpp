// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gaitformer/model.hpp"
#include "model_oracles.hpp"
#include "test_util.hpp"

namespace gaitformer {
namespace {

using namespace testing;

// Hand enumeration of every tensor in the layout, kept apart from the
// library's closed form.
std::size_t enumerate_params(const ModelConfig& c) {
  const auto linear = [](std::size_t in, std::size_t out) { return in * out + out; };
  const auto layer = [&](std::size_t w) {
    const std::size_t hidden = c.mlp_ratio * w;
    return 2 * w                      // LN1
           + 4 * linear(w, w)         // Q, K, V, out
           + 2 * w                    // LN2
           + linear(w, hidden) + linear(hidden, w);
  };
  const std::size_t D = c.embed_dim;
  const std::size_t M = c.joints * D;
  return linear(2, D) + c.joints * D                     // W_s, E_s
         + c.layers * layer(D) + 2 * D                   // spatial block
         + c.frames * M                                  // E_t
         + c.layers * layer(M) + 2 * M                   // temporal block
         + c.frames                                      // frame weights
         + linear(M, c.head_hidden) + linear(c.head_hidden, 1);
}

TEST(ModelTest, DefaultParameterCount) {
  const ModelConfig c;
  EXPECT_EQ(enumerate_params(c), 37637u);
  EXPECT_EQ(count_params(c), 37637u);
  EXPECT_EQ(total_elements(init_params(c, 1)), 37637u);
}

TEST(ModelTest, ParameterCountFollowsConfig) {
  ModelConfig two = ModelConfig{};
  two.layers = 2;
  EXPECT_EQ(count_params(two) - count_params(ModelConfig{}), 1884u + 28272u);

  for (std::size_t layers : {1u, 2u, 3u}) {
    for (std::size_t d : {4u, 8u, 12u}) {
      for (std::size_t heads : {1u, 2u, 4u}) {
        for (std::size_t joints : {4u, 8u}) {
          ModelConfig c;
          c.layers = layers;
          c.embed_dim = d;
          c.heads = heads;
          c.joints = joints;
          c.frames = 10;
          EXPECT_EQ(count_params(c), enumerate_params(c));
          EXPECT_EQ(total_elements(init_params(c, 0)), count_params(c));
        }
      }
    }
  }
}

TEST(ModelTest, ConfigValidationNamesConstraint) {
  ModelConfig c;
  c.embed_dim = 10;
  c.heads = 3;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("divisible"), std::string::npos) << e.what();
  }
  ModelConfig zero;
  zero.layers = 0;
  EXPECT_THROW(zero.validate(), ConfigError);
  zero = ModelConfig{};
  zero.frames = 0;
  EXPECT_THROW(zero.validate(), ConfigError);
  EXPECT_THROW(init_params(c, 0), ConfigError);
}

TEST(ModelTest, InitIsDeterministicAndFollowsRecipe) {
  const ModelConfig c;
  const ModelParams a = init_params(c, 42);
  const ModelParams b = init_params(c, 42);
  const ModelParams other = init_params(c, 43);
  bool all_equal = true;
  bool any_diff = false;
  for_each_param(
      [&](const std::string&, const Tensor& x, const Tensor& y, const Tensor& z) {
        all_equal = all_equal && x == y;
        any_diff = any_diff || !(x == z);
      },
      a, b, other);
  EXPECT_TRUE(all_equal);
  EXPECT_TRUE(any_diff);

  for (double w : a.frame_weights.values()) EXPECT_EQ(w, 1.0 / 124.0);
  for (double g : a.spatial.final_norm.gamma.values()) EXPECT_EQ(g, 1.0);
  for (double v : a.temporal.layers[0].query.bias.values()) EXPECT_EQ(v, 0.0);
  const double bound = std::sqrt(1.0 / 48.0);
  for (double v : a.temporal.layers[0].key.weight.values()) EXPECT_LE(std::abs(v), bound);
  double sq = 0.0;
  for (double v : a.temporal_position.values()) sq += v * v;
  EXPECT_NEAR(std::sqrt(sq / a.temporal_position.size()), 0.02, 0.002);
}

TEST(ModelTest, EmbedSpatialExamples) {
  const ModelConfig c;
  ModelParams p = init_params(c, 3);
  std::mt19937_64 rng(3);
  for (double& v : p.joint_embedding.weight.values()) v = 0.0;
  Tape tape;
  const Tensor x = random_tensor({c.frames, c.joints, 2}, rng);
  const Tensor out = embed_spatial(tape.constant(x), bind_constants(tape, p), c).value();
  ASSERT_EQ(out.shape(), (Shape{124, 4, 12}));
  for (std::size_t t = 0; t < c.frames; ++t) {
    for (std::size_t i = 0; i < 48; ++i) EXPECT_EQ(out[t * 48 + i], p.spatial_position[i]);
  }

  // E_s = 0 and identical poses in two frames: identical embeddings.
  ModelParams q = init_params(c, 4);
  for (double& v : q.spatial_position.values()) v = 0.0;
  Tensor same = x;
  std::copy_n(same.data(), 8, same.data() + 8 * 5);
  Tape tape2;
  const Tensor e = embed_spatial(tape2.constant(same), bind_constants(tape2, q), c).value();
  for (std::size_t i = 0; i < 48; ++i) EXPECT_EQ(e[i], e[5 * 48 + i]);

  Tape tape3;
  EXPECT_THROW(embed_spatial(tape3.constant(Tensor({124, 5, 2})), bind_constants(tape3, q), c), ShapeError);
}

TEST(ModelTest, AttentionWithZeroQueryKeyIsUniform) {
  ModelConfig c;
  c.embed_dim = 8;
  c.heads = 2;
  ModelParams p = random_params(c, 5);
  auto& layer = p.spatial.layers[0];
  for (auto* lin : {&layer.query, &layer.key}) {
    for (double& v : lin->weight.values()) v = 0.0;
    for (double& v : lin->bias.values()) v = 0.0;
  }
  std::mt19937_64 rng(5);
  const Tensor z = random_tensor({5, 8}, rng);
  Tape tape;
  const BoundParams bound = bind_constants(tape, p);
  Tensor weights;
  const Tensor out = multi_head_attention(tape.constant(z), bound.spatial.layers[0], c, &weights).value();
  ASSERT_EQ(weights.shape(), (Shape{2, 5, 5}));
  for (double w : weights.values()) EXPECT_NEAR(w, 0.2, 1e-15);

  // Uniform weights: every token gets mean(V) W_out + b_out.
  std::vector<double> vmean(8, 0.0);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 8; ++j) {
      double v = layer.value.bias[j];
      for (std::size_t i = 0; i < 8; ++i) v += z[t * 8 + i] * layer.value.weight[i * 8 + j];
      vmean[j] += v / 5.0;
    }
  }
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 8; ++j) {
      double o = layer.out.bias[j];
      for (std::size_t i = 0; i < 8; ++i) o += vmean[i] * layer.out.weight[i * 8 + j];
      EXPECT_NEAR(out[t * 8 + j], o, 1e-12);
    }
  }
}

TEST(ModelTest, SingleTokenAttentionIsIdentity) {
  ModelConfig c;
  c.embed_dim = 4;
  const ModelParams p = random_params(c, 6);
  const auto& layer = p.spatial.layers[0];
  const Tensor z({1, 4}, {0.3, -0.2, 0.9, 0.1});
  Tape tape;
  Tensor weights;
  const Tensor out =
      multi_head_attention(tape.constant(z), bind_constants(tape, p).spatial.layers[0], c, &weights).value();
  for (double w : weights.values()) EXPECT_EQ(w, 1.0);
  for (std::size_t j = 0; j < 4; ++j) {
    double o = layer.out.bias[j];
    for (std::size_t i = 0; i < 4; ++i) {
      double v = layer.value.bias[i];
      for (std::size_t k = 0; k < 4; ++k) v += z[k] * layer.value.weight[k * 4 + i];
      o += v * layer.out.weight[i * 4 + j];
    }
    EXPECT_NEAR(out[j], o, 1e-14);
  }
}

TEST(ModelTest, AttentionScaleConventions) {
  // full_dim divides logits by sqrt(M); per_head by sqrt(M / H).
  ModelConfig c;
  c.embed_dim = 8;
  c.heads = 2;
  const ModelParams p = random_params(c, 7, 1.0);
  std::mt19937_64 rng(7);
  const Tensor z = random_tensor({3, 8}, rng);
  for (AttentionScale s : {AttentionScale::per_head, AttentionScale::full_dim}) {
    c.scale = s;
    Tape tape;
    const auto& layer = bind_constants(tape, p).spatial.layers[0];
    Tensor weights;
    multi_head_attention(tape.constant(z), layer, c, &weights);
    const double denom = std::sqrt(s == AttentionScale::per_head ? 4.0 : 8.0);
    const auto& L = p.spatial.layers[0];
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> logits(3);
        for (std::size_t j = 0; j < 3; ++j) {
          double dot = 0.0;
          for (std::size_t d = 0; d < 4; ++d) {
            const std::size_t col = h * 4 + d;
            double q = L.query.bias[col];
            double k = L.key.bias[col];
            for (std::size_t m = 0; m < 8; ++m) {
              q += z[i * 8 + m] * L.query.weight[m * 8 + col];
              k += z[j * 8 + m] * L.key.weight[m * 8 + col];
            }
            dot += q * k;
          }
          logits[j] = dot / denom;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (double& l : logits) sum += (l = std::exp(l - mx));
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(weights[(h * 3 + i) * 3 + j], logits[j] / sum, 1e-13);
      }
    }
  }
}

TEST(ModelTest, ZeroWeightBlockPassesResidual) {
  for (MlpInput conv : {MlpInput::paper, MlpInput::standard}) {
    ModelConfig c = tiny_config(conv);
    ModelParams p = random_params(c, 8);
    zero_attention_layers(p);
    std::mt19937_64 rng(8);
    const Tensor z = random_tensor({6, 4, 4}, rng);
    Tape tape;
    const BoundParams bound = bind_constants(tape, p);
    const Tensor out = attention_block(tape.constant(z), bound.spatial, c).value();
    const std::vector<double> ref = ref_layer_norm(std::vector<double>(z.values().begin(), z.values().end()),
                                                   p.spatial.final_norm.gamma, p.spatial.final_norm.beta, c.eps);
    ASSERT_EQ(out.shape(), z.shape());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-12);
  }
}

TEST(ModelTest, ZeroWeightModelMatchesReferencePipeline) {
  for (Activation act : {Activation::gelu, Activation::relu}) {
    ModelConfig c;
    c.activation = act;
    ModelParams p = random_params(c, 9);
    zero_attention_layers(p);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
      const Tensor x = random_tensor({c.frames, c.joints, 2}, rng);
      EXPECT_NEAR(predict(p, c, x).value, reference_zero_weight_forward(p, c, x), 1e-9);
    }
  }
}

TEST(ModelTest, MlpConventionsDiffer) {
  const Tensor x = [] {
    std::mt19937_64 rng(10);
    return random_tensor({6, 4, 2}, rng);
  }();
  const ModelParams p = random_params(tiny_config(), 10);
  const double a = predict(p, tiny_config(MlpInput::paper), x).value;
  const double b = predict(p, tiny_config(MlpInput::standard), x).value;
  EXPECT_NE(a, b);
}

TEST(ModelTest, SpatialBlockIsJointEquivariantWithoutPositions) {
  const ModelConfig c;
  ModelParams p = random_params(c, 11);
  for (double& v : p.spatial_position.values()) v = 0.0;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor x = random_tensor({c.frames, c.joints, 2}, rng);
    const auto perm = random_permutation(c.joints, rng);
    const Tensor expected = permute_axis1(spatial_block_output(p, c, x), perm);
    const Tensor actual = spatial_block_output(p, c, permute_axis1(x, perm));
    EXPECT_LT(max_abs_diff(expected, actual), 1e-9);
  }
}

TEST(ModelTest, PredictionIsFrameInvariantWithoutTemporalPositions) {
  const ModelConfig c;
  ModelParams p = random_params(c, 12);
  for (double& v : p.temporal_position.values()) v = 0.0;
  for (double& v : p.frame_weights.values()) v = 1.0 / static_cast<double>(c.frames);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor x = random_tensor({c.frames, c.joints, 2}, rng);
    const auto perm = random_permutation(c.frames, rng);
    EXPECT_NEAR(predict(p, c, x).value, predict(p, c, permute_axis0(x, perm)).value, 1e-9);
  }
  // With E_t in place, order matters.
  const ModelParams q = random_params(c, 12);
  const Tensor x = random_tensor({c.frames, c.joints, 2}, rng);
  EXPECT_GT(std::abs(predict(q, c, x).value - predict(q, c, permute_axis0(x, random_permutation(c.frames, rng))).value),
            1e-9);
}

TEST(ModelTest, ForwardShapesAndPurity) {
  const ModelConfig c;
  const ModelParams p = init_params(c, 13);
  std::mt19937_64 rng(13);
  const Tensor x = random_tensor({c.frames, c.joints, 2}, rng);
  const Prediction a = predict(p, c, x);
  const Prediction b = predict(p, c, x);
  EXPECT_TRUE(std::isfinite(a.value));
  EXPECT_EQ(a.value, b.value);

  Tensor batch({3, c.frames, c.joints, 2});
  for (std::size_t s = 0; s < 3; ++s) std::copy_n(x.data(), x.size(), batch.data() + s * x.size());
  const std::vector<double> values = predict_batch(p, c, batch);
  ASSERT_EQ(values.size(), 3u);
  for (double v : values) EXPECT_NEAR(v, a.value, 1e-12);
}

TEST(ModelTest, ForwardShapeErrorNamesStage) {
  const ModelConfig c;
  const ModelParams p = init_params(c, 14);
  try {
    predict(p, c, Tensor({100, 4, 2}));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("joint embedding"), std::string::npos) << e.what();
  }
  EXPECT_THROW(predict(p, c, Tensor({124, 8, 2})), ShapeError);
  EXPECT_THROW(check_shapes(init_params(c, 0), ModelConfig{.joints = 8}), ShapeError);
}

TEST(ModelTest, AttentionCaptureCountsAndRows) {
  ModelConfig c;
  const ModelParams p = init_params(c, 15);
  std::mt19937_64 rng(15);
  const Prediction out = predict(p, c, random_tensor({c.frames, c.joints, 2}, rng), true);
  std::size_t spatial = 0;
  std::size_t temporal = 0;
  for (const AttentionRecord& r : out.attention) {
    const std::size_t n = r.block == AttentionBlockKind::spatial ? c.joints : c.frames;
    ASSERT_EQ(r.matrix.shape(), (Shape{n, n}));
    (r.block == AttentionBlockKind::spatial ? spatial : temporal) += 1;
    EXPECT_EQ(r.frame.has_value(), r.block == AttentionBlockKind::spatial);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += r.matrix[i * n + j];
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
  EXPECT_EQ(spatial, 248u);
  EXPECT_EQ(temporal, 2u);

  c.layers = 2;
  c.frames = 10;
  const Prediction two = predict(init_params(c, 16), c, random_tensor({10, 4, 2}, rng), true);
  EXPECT_EQ(two.attention.size(), 10u * 2 * 2 + 2 * 2);
  // Capture does not change the prediction.
  EXPECT_EQ(predict(p, ModelConfig{}, Tensor({124, 4, 2}, 0.1), true).value,
            predict(p, ModelConfig{}, Tensor({124, 4, 2}, 0.1), false).value);
}

TEST(ModelTest, GradientsMatchFiniteDifferences) {
  for (MlpInput conv : {MlpInput::paper, MlpInput::standard}) {
    const ModelConfig c = tiny_config(conv);
    const auto errors = model_gradient_errors(random_params(c, 17), c, random_problem(c, 3, 17));
    for (const auto& [name, err] : errors) EXPECT_LT(err, 1e-4) << name;
  }
}

}  // namespace
}  // namespace gaitformer

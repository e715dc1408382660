// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/optim.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace gaitformer {

void SgdrSchedule::validate() const {
  if (!(lr_max > lr_min) || !(lr_min > 0.0)) {
    throw ConfigError(fmt::format("schedule needs lr_max > lr_min > 0, got {} / {}", lr_max, lr_min));
  }
  if (cycle_epochs < 1) throw ConfigError("schedule cycle length T_0 must be >= 1");
  if (cycle_mult < 1) throw ConfigError("schedule T_mult must be >= 1");
}

double sgdr_lr(const SgdrSchedule& schedule, std::int64_t epoch) {
  if (epoch < 0) throw std::invalid_argument("sgdr_lr: epoch must be >= 0");
  std::int64_t cycle = schedule.cycle_epochs;
  std::int64_t since_restart = epoch;
  if (schedule.cycle_mult == 1) {
    since_restart = epoch % cycle;
  } else {
    while (since_restart >= cycle) {
      since_restart -= cycle;
      cycle *= schedule.cycle_mult;
    }
  }
  const double progress = static_cast<double>(since_restart) / static_cast<double>(cycle);
  return schedule.lr_min +
         (schedule.lr_max - schedule.lr_min) * (1.0 + std::cos(std::numbers::pi * progress)) / 2.0;
}

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState state;
  state.m = zeros_like(params);
  state.v = zeros_like(params);
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  // Validate every shape before touching anything so a mismatch leaves the
  // state untouched.
  for_each_param(
      [](const std::string& name, const Tensor& p, const Tensor& g, const Tensor& m, const Tensor& v) {
        if (g.shape() != p.shape() || m.shape() != p.shape() || v.shape() != p.shape()) {
          throw ShapeError(fmt::format("adam_step: gradient/moment shape mismatch for {}: {} vs {}",
                                       name, to_string(g.shape()), to_string(p.shape())));
        }
      },
      params, grads, state.m, state.v);

  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double eps = state.eps;
  for_each_param(
      [&](const std::string&, Tensor& p, const Tensor& g, Tensor& m, Tensor& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          m[i] = b1 * m[i] + (1.0 - b1) * g[i];
          v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
          const double m_hat = m[i] / correction1;
          const double v_hat = v[i] / correction2;
          p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
      },
      params, grads, state.m, state.v);
}

}  // namespace gaitformer

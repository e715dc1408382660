// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "gaitformer/model_params.hpp"

namespace gaitformer {

/// Cosine annealing with warm restarts, stepped once per epoch.
struct SgdrSchedule {
  double lr_max = 3e-4;
  double lr_min = 8e-5;
  std::int64_t cycle_epochs = 40;  // T_0
  std::int64_t cycle_mult = 1;     // T_mult

  void validate() const;
};

/// lr_min + (lr_max - lr_min) * (1 + cos(pi * T_cur / T_i)) / 2, where T_cur
/// counts epochs since the last restart and T_i is the current cycle length.
double sgdr_lr(const SgdrSchedule& schedule, std::int64_t epoch);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Zeroed moments shaped like `params`.
  static AdamState for_params(const ModelParams& params);
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr);

}  // namespace gaitformer

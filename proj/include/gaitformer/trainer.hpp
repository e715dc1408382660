// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gaitformer/dataset.hpp"
#include "gaitformer/metrics.hpp"
#include "gaitformer/model.hpp"
#include "gaitformer/optim.hpp"
#include "gaitformer/run_config.hpp"

namespace gaitformer {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Affine map between task units and the units the network is trained in.
struct TargetScaler {
  double mean = 0.0;
  double scale = 1.0;

  double encode(double target) const { return (target - mean) / scale; }
  double decode(double output) const { return output * scale + mean; }

  /// Mean / population std of the targets; identity when disabled or when
  /// the targets are constant.
  static TargetScaler fit(std::span<const MotionSegment> segments, bool enabled);
};

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // MSE in task units
  std::optional<double> val_loss;
  std::optional<double> val_correlation;
  std::optional<double> val_mae;
};

/// CSV header and row of the per-epoch training log.
std::string log_header();
std::string log_row(const EpochLog& row);

/// Parameters plus everything needed to resume or evaluate them.
struct TrainingSnapshot {
  ModelParams params;
  AdamState adam;
  std::size_t epoch = 0;   // last completed epoch
  std::string rng_state;   // batch-shuffling generator after `epoch`
};

struct TrainResult {
  TrainingSnapshot best;
  TrainingSnapshot last;
  double best_val_loss = 0.0;  // NaN without a validation split
  TargetScaler scaler;
  std::vector<EpochLog> log;
};

struct TrainHooks {
  /// Called after every epoch with the log row and the current state.
  std::function<void(const EpochLog&, const TrainingSnapshot&)> on_epoch;
};

/// Stacks segment values into a (B, T, N, 2) batch.
Tensor stack_segments(std::span<const MotionSegment* const> segments);

/// Mini-batch Adam on MSE with the SGDR learning rate stepped per epoch.
/// The best snapshot minimizes validation MSE (the last one when `val` is
/// empty). Throws TrainingError on a non-finite loss.
///
/// With `resume`, training continues after resume->epoch and reproduces an
/// uninterrupted run exactly; best-snapshot tracking restarts at the resume
/// point.
TrainResult train(const RunConfig& config, std::span<const MotionSegment> train_set,
                  std::span<const MotionSegment> val_set, const TrainHooks& hooks = {},
                  const TrainingSnapshot* resume = nullptr);

/// Predictions in task units, in segment order. Each segment runs its own
/// forward pass, so values match single-window inference bit for bit.
std::vector<double> predict_segments(const ModelParams& params, const ModelConfig& config,
                                     const TargetScaler& scaler, std::span<const MotionSegment> segments);

EvalReport evaluate(const ModelParams& params, const ModelConfig& config, const TargetScaler& scaler,
                    std::span<const MotionSegment> segments, Task task);

}  // namespace gaitformer

// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace gaitformer {

TargetScaler TargetScaler::fit(std::span<const MotionSegment> segments, bool enabled) {
  TargetScaler scaler;
  if (!enabled || segments.empty()) return scaler;
  double mean = 0.0;
  for (const MotionSegment& s : segments) mean += s.target;
  mean /= static_cast<double>(segments.size());
  double var = 0.0;
  for (const MotionSegment& s : segments) var += (s.target - mean) * (s.target - mean);
  var /= static_cast<double>(segments.size());
  scaler.mean = mean;
  scaler.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return scaler;
}

std::string log_header() { return "epoch,lr,train_loss,val_loss,val_correlation,val_mae"; }

std::string log_row(const EpochLog& row) {
  const auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  return fmt::format("{},{},{},{},{},{}", row.epoch, row.lr, row.train_loss, cell(row.val_loss),
                     cell(row.val_correlation), cell(row.val_mae));
}

Tensor stack_segments(std::span<const MotionSegment* const> segments) {
  if (segments.empty()) throw std::invalid_argument("stack_segments: empty batch");
  const Shape& shape = segments.front()->values.shape();
  Shape batch_shape{segments.size()};
  batch_shape.insert(batch_shape.end(), shape.begin(), shape.end());
  std::vector<double> values;
  values.reserve(numel(batch_shape));
  for (const MotionSegment* s : segments) {
    if (s->values.shape() != shape) {
      throw ShapeError(fmt::format("stack_segments: segment {}@{} has shape {}, expected {}", s->video_id,
                                   s->start, to_string(s->values.shape()), to_string(shape)));
    }
    values.insert(values.end(), s->values.values().begin(), s->values.values().end());
  }
  return Tensor(std::move(batch_shape), std::move(values));
}

std::vector<double> predict_segments(const ModelParams& params, const ModelConfig& config,
                                     const TargetScaler& scaler, std::span<const MotionSegment> segments) {
  // One forward per segment: a prediction never depends on which other
  // segments share its batch.
  std::vector<double> out;
  out.reserve(segments.size());
  for (const MotionSegment& s : segments) out.push_back(scaler.decode(predict(params, config, s.values).value));
  return out;
}

EvalReport evaluate(const ModelParams& params, const ModelConfig& config, const TargetScaler& scaler,
                    std::span<const MotionSegment> segments, Task task) {
  const std::vector<double> pred = predict_segments(params, config, scaler, segments);
  std::vector<EvalRow> rows;
  rows.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const MotionSegment& s = segments[i];
    rows.push_back({fmt::format("{}@{}", s.video_id, s.start), s.video_id, pred[i], s.target});
  }
  return EvalReport::from_rows(std::string(to_string(task)), std::move(rows));
}

namespace {

// Seeds the shuffling stream apart from parameter initialization.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

TrainResult train(const RunConfig& config, std::span<const MotionSegment> train_set,
                  std::span<const MotionSegment> val_set, const TrainHooks& hooks,
                  const TrainingSnapshot* resume) {
  if (train_set.empty()) throw TrainingError("training split is empty");
  const ModelConfig& model = config.model;
  model.validate();
  const SgdrSchedule schedule = config.schedule();
  schedule.validate();

  TrainResult result;
  result.scaler = TargetScaler::fit(train_set, config.standardize_targets);
  result.best_val_loss = std::numeric_limits<double>::quiet_NaN();
  const TargetScaler& scaler = result.scaler;

  TrainingSnapshot state;
  std::mt19937_64 rng(config.seed ^ kShuffleStream);
  std::size_t first_epoch = 0;
  if (resume) {
    check_shapes(resume->params, model);
    state = *resume;
    std::istringstream in(resume->rng_state);
    in >> rng;
    if (!in) throw TrainingError("resume: unreadable shuffling state");
    first_epoch = resume->epoch + 1;
  } else {
    state.params = init_params(model, config.seed);
    state.adam = AdamState::for_params(state.params);
  }
  std::vector<std::size_t> order(train_set.size());
  std::vector<const MotionSegment*> batch;

  for (std::size_t epoch = first_epoch; epoch < config.epochs; ++epoch) {
    EpochLog row;
    row.epoch = epoch;
    row.lr = sgdr_lr(schedule, static_cast<std::int64_t>(epoch));

    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double total = 0.0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t last = std::min(order.size(), first + config.batch_size);
      batch.clear();
      std::vector<double> targets;
      for (std::size_t i = first; i < last; ++i) {
        batch.push_back(&train_set[order[i]]);
        targets.push_back(scaler.encode(train_set[order[i]].target));
      }
      Tape tape;
      const BoundParams bound = bind_parameters(tape, state.params);
      const ForwardResult out = forward(tape.constant(stack_segments(batch)), bound, model);
      const Var loss = mse_loss(out.prediction, tape.constant(Tensor({batch.size(), 1}, std::move(targets))));
      const double value = loss.value().item();
      if (!std::isfinite(value)) throw TrainingError(fmt::format("non-finite training loss at epoch {}", epoch));
      tape.backward(loss);
      adam_step(state.params, collect_gradients(tape, bound), state.adam, row.lr);
      total += value * static_cast<double>(batch.size());
    }
    row.train_loss = total / static_cast<double>(order.size()) * scaler.scale * scaler.scale;
    state.epoch = epoch;
    std::ostringstream rng_out;
    rng_out << rng;
    state.rng_state = rng_out.str();

    const bool evaluate_now = (epoch + 1) % config.eval_every == 0 || epoch + 1 == config.epochs;
    if (!val_set.empty() && evaluate_now) {
      const std::vector<double> pred = predict_segments(state.params, model, scaler, val_set);
      double sq = 0.0;
      std::vector<double> targets;
      for (std::size_t i = 0; i < val_set.size(); ++i) {
        sq += (pred[i] - val_set[i].target) * (pred[i] - val_set[i].target);
        targets.push_back(val_set[i].target);
      }
      row.val_loss = sq / static_cast<double>(val_set.size());
      if (!std::isfinite(*row.val_loss)) {
        throw TrainingError(fmt::format("non-finite validation loss at epoch {}", epoch));
      }
      row.val_mae = mae(pred, targets);
      try {
        row.val_correlation = pearson(pred, targets);
      } catch (const MetricError&) {
        row.val_correlation.reset();
      }
      if (std::isnan(result.best_val_loss) || *row.val_loss < result.best_val_loss) {
        result.best_val_loss = *row.val_loss;
        result.best = state;
      }
    }
    result.log.push_back(row);
    if (hooks.on_epoch) hooks.on_epoch(row, state);
  }
  if (val_set.empty() || std::isnan(result.best_val_loss)) result.best = state;
  result.last = std::move(state);
  return result;
}

}  // namespace gaitformer

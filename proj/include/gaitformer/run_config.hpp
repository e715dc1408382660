// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitformer/dataset.hpp"
#include "gaitformer/model_config.hpp"
#include "gaitformer/optim.hpp"

namespace gaitformer {

/// Everything a training run needs. Defaults: T=124, D=12, L=1, H=2, Adam
/// for 200 epochs at batch size 128, SGDR with T_0=40 and T_mult=1, task-specific learning rates.
struct RunConfig {
  Task task = Task::gdi;
  ModelConfig model;
  /// Unset values bind per task: speed/cadence 6e-4 -> 1e-4,
  /// gdi/knee_flexion 3e-4 -> 8e-5.
  std::optional<double> lr_max;
  std::optional<double> lr_min;
  std::int64_t cycle_epochs = 40;
  std::int64_t cycle_mult = 1;
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  SplitRatios ratios;
  std::size_t eval_every = 1;
  std::size_t window_offset = 31;
  bool end_aligned = false;
  double max_missing_fraction = 0.2;
  /// Per-side tasks: train on rows of one side only (one model per side).
  std::optional<Side> side;
  /// Train on z-scored targets; predictions are mapped back to task units.
  bool standardize_targets = true;

  SgdrSchedule schedule() const;
  SegmentOptions segment_options() const;

  /// Sets the joint count implied by the task and validates every field.
  void finalize();

  /// Applies one `key=value` setting; throws ConfigError on unknown keys or
  /// unparsable values.
  void set(std::string_view key, std::string_view value);

  /// Settings as `key=value` lines accepted by set(), in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Reads a flat key=value file ('#' starts a comment) on top of `base`.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace gaitformer

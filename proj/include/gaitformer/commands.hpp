// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "gaitformer/checkpoint.hpp"
#include "gaitformer/dataset.hpp"
#include "gaitformer/metrics.hpp"
#include "gaitformer/run_config.hpp"
#include "gaitformer/synthetic.hpp"

namespace gaitformer {

// Each command writes human-readable progress to `out` and throws on
// failure; the executable turns exceptions into a one-line diagnostic.

struct TrainOutputs {
  std::filesystem::path log;              // train_log.csv
  std::filesystem::path best_checkpoint;  // best.ckpt
  std::filesystem::path last_checkpoint;  // last.ckpt
  std::filesystem::path split;            // split.csv
  TrainResult result;
};

/// Loads the manifest, splits by patient, trains and writes the log, the
/// split assignment and both checkpoints into config.output_dir. With
/// `resume`, training continues from that checkpoint and rows are appended
/// to an existing log.
TrainOutputs cmd_train(RunConfig config, std::ostream& out,
                       const std::optional<std::filesystem::path>& resume = std::nullopt);

struct EvalOptions {
  std::filesystem::path checkpoint;
  /// Defaults to the manifest recorded in the checkpoint.
  std::optional<std::filesystem::path> manifest;
  SplitKind split = SplitKind::test;
  /// Report files go here; nothing is written when unset.
  std::optional<std::filesystem::path> output_dir;
};

/// Rebuilds the split recorded in the checkpoint and evaluates one part.
/// Writes eval_<split>.csv (per segment) and eval_<split>_summary.csv.
EvalReport cmd_eval(const EvalOptions& options, std::ostream& out);

/// Keypoint file plus what is needed to normalize it.
struct KeypointInput {
  std::filesystem::path path;
  Side side = Side::left;  // ignored by two-sided tasks
  double width = 0.0;
  double height = 0.0;
};

struct WindowPrediction {
  std::size_t start = 0;
  double value = 0.0;
};

/// Windows the sequence with the checkpoint's settings and predicts each
/// window. Prints `window,start,prediction` rows and the mean.
std::vector<WindowPrediction> cmd_predict(const std::filesystem::path& checkpoint, const KeypointInput& input,
                                          std::ostream& out);

struct ExportOptions {
  std::filesystem::path checkpoint;
  KeypointInput input;
  std::size_t window = 0;
  std::size_t frame = 0;  // spatial matrices are exported for this frame
  bool spatial = true;
  bool temporal = true;
  std::filesystem::path output_dir;
};

/// Writes CSV + SVG per exported matrix; returns the CSV paths.
std::vector<std::filesystem::path> cmd_export_attention(const ExportOptions& options, std::ostream& out);

/// Generates and writes a synthetic dataset; returns the manifest path.
std::filesystem::path cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& dir, std::ostream& out);

/// Prints the closed-form count, optionally followed by one line per tensor.
std::size_t cmd_count_params(const ModelConfig& config, bool verbose, std::ostream& out);

}  // namespace gaitformer

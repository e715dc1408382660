// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>

#include "gaitformer/run_config.hpp"
#include "gaitformer/trainer.hpp"

namespace gaitformer {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything written to disk after training: the run settings, the model
/// and optimizer state, and the target scaling the model was trained with.
struct Checkpoint {
  RunConfig run;
  TrainingSnapshot state;
  TargetScaler scaler;
};

/// JSON container. Numbers are written in shortest round-trip form, so
/// load(save(c)) restores every value exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gaitformer

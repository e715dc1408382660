// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gaitformer/keypoints.hpp"

namespace gaitformer {

/// Parameters of the synthetic side-view walker. Each sample draws speed,
/// cadence and knee-flexion amplitude uniformly from the given ranges.
struct SyntheticSpec {
  std::size_t samples = 500;
  std::size_t frames = 124;
  std::size_t videos_per_patient = 2;
  double frame_rate = 31.25;
  double cadence_min = 0.8;  // strides / s
  double cadence_max = 1.2;
  double speed_min = 0.6;  // m / s
  double speed_max = 1.4;
  double amplitude_min = 40.0;  // degrees of peak knee flexion
  double amplitude_max = 70.0;
  double noise_sigma = 2.0;  // pixels
  double width = 640.0;
  double height = 480.0;
  double pixels_per_meter = 80.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticTargets {
  double speed = 0.0;
  double cadence = 0.0;
  double amplitude = 0.0;
};

struct SyntheticSample {
  MotionSequence sequence;  // both sides, pixel coordinates
  SyntheticTargets targets;
};

// Segment lengths of the walker in meters.
inline constexpr double kThighLength = 0.45;
inline constexpr double kShankLength = 0.43;
inline constexpr double kFootLength = 0.20;
inline constexpr double kThighSwingDegrees = 25.0;

/// Kinematic walker: the hips translate at the drawn speed, each leg's thigh
/// swings sinusoidally at the drawn cadence (right leg half a cycle behind)
/// and the knee flexes between 0 and the drawn amplitude. Gaussian pixel
/// noise is added last. Throws ConfigError if any keypoint would leave the
/// frame.
std::vector<SyntheticSample> generate_synthetic(const SyntheticSpec& spec);

/// Writes `manifest.csv` and `keypoints/<video>.csv` under `dir`; returns the
/// manifest path. The amplitude is stored as the knee_flexion target and
/// the GDI column is left empty.
std::filesystem::path write_synthetic(const std::filesystem::path& dir,
                                      const std::vector<SyntheticSample>& samples);

}  // namespace gaitformer

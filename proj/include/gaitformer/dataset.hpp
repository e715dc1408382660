// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaitformer/keypoints.hpp"
#include "gaitformer/tensor.hpp"

namespace gaitformer {

enum class Task { gdi, knee_flexion, speed, cadence };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

/// GDI and knee flexion are per-side targets (N = 4); speed and cadence use
/// both sides (N = 8, left joints first).
bool task_uses_both_sides(Task task);
std::size_t task_joint_count(Task task);

/// One fixed-length window: values are (T, N, 2) normalized coordinates.
struct MotionSegment {
  Tensor values;
  double target = 0.0;
  std::string video_id;
  std::string patient_id;
  std::size_t start = 0;
};

/// Window start frames: 0, offset, 2*offset, ... while start + window fits.
/// With `end_aligned`, a final window ending at the last frame is appended
/// when the regular starts leave a tail uncovered.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t window, std::size_t offset,
                                       bool end_aligned = false);

/// Cuts `seq` into segments. Targets are left at 0 for the caller to fill.
std::vector<MotionSegment> window_slice(const MotionSequence& seq, std::size_t window = 124,
                                        std::size_t offset = 31, bool end_aligned = false);

struct ManifestEntry {
  std::string video_id;
  std::string patient_id;
  std::filesystem::path keypoint_path;  // resolved against the manifest's directory
  double frame_rate = 0.0;
  double width = 0.0;
  double height = 0.0;
  Side side = Side::left;
  std::optional<double> gdi;
  std::optional<double> knee_flexion;
  std::optional<double> speed;
  std::optional<double> cadence;

  std::optional<double> target(Task task) const;
};

/// Reads `video_id,patient_id,keypoint_path,frame_rate,width,height,side,
/// gdi,knee_flexion,speed,cadence`. Relative keypoint paths are resolved
/// against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

/// Writes entries with keypoint paths relative to the manifest's directory.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

struct SegmentOptions {
  std::size_t window = 124;
  std::size_t offset = 31;
  bool end_aligned = false;
  double max_missing_fraction = 0.2;
  /// Per-side tasks only: keep rows of this side. Unset keeps both.
  std::optional<Side> side;
};

/// Loads, normalizes and windows every manifest row that has a target for
/// `task`. Single-side tasks read the row's side, which must be L or R.
std::vector<MotionSegment> build_segments(const std::vector<ManifestEntry>& manifest, Task task,
                                          const SegmentOptions& options);

/// Loads and normalizes one keypoint file for inference.
MotionSequence load_sequence(const std::filesystem::path& path, Task task, Side side, double width,
                             double height, double max_missing_fraction = 0.2);

enum class SplitKind { train, val, test };
std::string_view to_string(SplitKind kind);
SplitKind parse_split(std::string_view text);

struct SplitRatios {
  double train = 8.0;
  double val = 1.0;
  double test = 1.0;
};

struct DatasetSplit {
  std::vector<MotionSegment> train;
  std::vector<MotionSegment> val;
  std::vector<MotionSegment> test;
  std::uint64_t seed = 0;
  std::map<std::string, SplitKind> assignment;  // patient id -> split

  const std::vector<MotionSegment>& part(SplitKind kind) const;
};

/// Patient counts per split for `patients` patients: cumulative ratio
/// boundaries rounded to the nearest patient, every split non-empty.
std::array<std::size_t, 3> split_sizes(std::size_t patients, const SplitRatios& ratios);

/// Shuffles distinct patient ids with a seeded RNG and assigns them to
/// train/val/test by `split_sizes`; segments follow their patient, keeping
/// their input order within each split.
DatasetSplit split_by_patient(const std::vector<MotionSegment>& segments, const SplitRatios& ratios,
                              std::uint64_t seed);

}  // namespace gaitformer

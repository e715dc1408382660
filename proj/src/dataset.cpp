// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/os.h>

#include "csv.hpp"

namespace gaitformer {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::gdi: return "gdi";
    case Task::knee_flexion: return "knee_flexion";
    case Task::speed: return "speed";
    case Task::cadence: return "cadence";
  }
  return "?";
}

Task parse_task(std::string_view text) {
  if (text == "gdi") return Task::gdi;
  if (text == "knee_flexion") return Task::knee_flexion;
  if (text == "speed") return Task::speed;
  if (text == "cadence") return Task::cadence;
  throw DataError(fmt::format("unknown task '{}' (expected gdi, knee_flexion, speed or cadence)", text));
}

bool task_uses_both_sides(Task task) { return task == Task::speed || task == Task::cadence; }

std::size_t task_joint_count(Task task) { return task_uses_both_sides(task) ? 8 : 4; }

std::vector<std::size_t> window_starts(std::size_t length, std::size_t window, std::size_t offset,
                                       bool end_aligned) {
  if (window == 0 || offset == 0) throw std::invalid_argument("window and offset must be >= 1");
  std::vector<std::size_t> starts;
  for (std::size_t start = 0; start + window <= length; start += offset) starts.push_back(start);
  if (end_aligned && !starts.empty() && starts.back() + window < length) starts.push_back(length - window);
  return starts;
}

std::vector<MotionSegment> window_slice(const MotionSequence& seq, std::size_t window,
                                        std::size_t offset, bool end_aligned) {
  std::vector<MotionSegment> segments;
  const std::size_t joints = seq.joint_count();
  for (std::size_t start : window_starts(seq.frame_count(), window, offset, end_aligned)) {
    const auto first = seq.coords.begin() + static_cast<std::ptrdiff_t>(start * joints * 2);
    std::vector<double> values(first, first + static_cast<std::ptrdiff_t>(window * joints * 2));
    MotionSegment segment;
    segment.values = Tensor({window, joints, 2}, std::move(values));
    segment.video_id = seq.video_id;
    segment.patient_id = seq.patient_id;
    segment.start = start;
    segments.push_back(std::move(segment));
  }
  return segments;
}

std::optional<double> ManifestEntry::target(Task task) const {
  switch (task) {
    case Task::gdi: return gdi;
    case Task::knee_flexion: return knee_flexion;
    case Task::speed: return speed;
    case Task::cadence: return cadence;
  }
  return std::nullopt;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open manifest {}", path.string()));
  csv::Reader reader(in, path.string());
  reader.expect_header({"video_id", "patient_id", "keypoint_path", "frame_rate", "width", "height",
                        "side", "gdi", "knee_flexion", "speed", "cadence"});
  const std::filesystem::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::vector<std::string> f;
  std::set<std::string> seen;
  while (reader.next(f)) {
    if (f.size() != 11) reader.fail(fmt::format("expected 11 fields, got {}", f.size()));
    ManifestEntry e;
    e.video_id = f[0];
    e.patient_id = f[1];
    if (e.video_id.empty() || e.patient_id.empty()) reader.fail("video_id and patient_id are required");
    if (!seen.insert(e.video_id).second) reader.fail(fmt::format("duplicate video_id '{}'", e.video_id));
    const std::filesystem::path kp(f[2]);
    e.keypoint_path = kp.is_absolute() ? kp : base / kp;
    e.frame_rate = reader.parse_double(f[3], "frame_rate");
    e.width = reader.parse_double(f[4], "width");
    e.height = reader.parse_double(f[5], "height");
    if (!(e.width > 0.0) || !(e.height > 0.0)) reader.fail("width and height must be positive");
    try {
      e.side = parse_side(f[6]);
    } catch (const DataError& err) {
      reader.fail(err.what());
    }
    e.gdi = reader.parse_optional_double(f[7], "gdi");
    e.knee_flexion = reader.parse_optional_double(f[8], "knee_flexion");
    e.speed = reader.parse_optional_double(f[9], "speed");
    e.cadence = reader.parse_optional_double(f[10], "cadence");
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  const std::filesystem::path base = path.parent_path();
  const auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  auto out = fmt::output_file(path.string());
  out.print("video_id,patient_id,keypoint_path,frame_rate,width,height,side,gdi,knee_flexion,speed,cadence\n");
  for (const ManifestEntry& e : entries) {
    const std::filesystem::path kp =
        e.keypoint_path.is_absolute() ? std::filesystem::relative(e.keypoint_path, base) : e.keypoint_path;
    out.print("{},{},{},{},{},{},{},{},{},{},{}\n", e.video_id, e.patient_id, kp.generic_string(),
              e.frame_rate, e.width, e.height, side_code(e.side), cell(e.gdi), cell(e.knee_flexion),
              cell(e.speed), cell(e.cadence));
  }
}

MotionSequence load_sequence(const std::filesystem::path& path, Task task, Side side, double width,
                             double height, double max_missing_fraction) {
  KeypointOptions options;
  options.side = task_uses_both_sides(task) ? Side::both : side;
  if (options.side == Side::both && !task_uses_both_sides(task)) {
    throw DataError(fmt::format("task {} is per-side; side must be L or R", to_string(task)));
  }
  options.max_missing_fraction = max_missing_fraction;
  options.resolution = std::make_pair(width, height);
  MotionSequence seq = load_keypoints(path, options);
  return normalize(std::move(seq));
}

std::vector<MotionSegment> build_segments(const std::vector<ManifestEntry>& manifest, Task task,
                                          const SegmentOptions& options) {
  std::vector<MotionSegment> segments;
  for (const ManifestEntry& entry : manifest) {
    const auto target = entry.target(task);
    if (!target || std::isnan(*target)) continue;
    if (options.side && !task_uses_both_sides(task) && entry.side != *options.side) continue;
    MotionSequence seq;
    try {
      seq = load_sequence(entry.keypoint_path, task, entry.side, entry.width, entry.height,
                          options.max_missing_fraction);
    } catch (const DataError& e) {
      throw DataError(fmt::format("video {}: {}", entry.video_id, e.what()));
    }
    seq.video_id = entry.video_id;
    seq.patient_id = entry.patient_id;
    seq.frame_rate = entry.frame_rate;
    for (MotionSegment& segment : window_slice(seq, options.window, options.offset, options.end_aligned)) {
      segment.target = *target;
      segments.push_back(std::move(segment));
    }
  }
  return segments;
}

std::string_view to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::train: return "train";
    case SplitKind::val: return "val";
    case SplitKind::test: return "test";
  }
  return "?";
}

SplitKind parse_split(std::string_view text) {
  if (text == "train") return SplitKind::train;
  if (text == "val") return SplitKind::val;
  if (text == "test") return SplitKind::test;
  throw DataError(fmt::format("unknown split '{}' (expected train, val or test)", text));
}

const std::vector<MotionSegment>& DatasetSplit::part(SplitKind kind) const {
  switch (kind) {
    case SplitKind::train: return train;
    case SplitKind::val: return val;
    case SplitKind::test: return test;
  }
  return test;
}

std::array<std::size_t, 3> split_sizes(std::size_t patients, const SplitRatios& ratios) {
  if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || !(ratios.test > 0.0)) {
    throw std::invalid_argument("split ratios must be positive");
  }
  if (patients < 3) {
    throw DataError(fmt::format("need at least 3 distinct patients for a 3-way split, got {}", patients));
  }
  const double total = ratios.train + ratios.val + ratios.test;
  const double n = static_cast<double>(patients);
  auto first = static_cast<std::size_t>(std::llround(n * ratios.train / total));
  auto second = static_cast<std::size_t>(std::llround(n * (ratios.train + ratios.val) / total));
  first = std::clamp<std::size_t>(first, 1, patients - 2);
  second = std::clamp<std::size_t>(second, first + 1, patients - 1);
  return {first, second - first, patients - second};
}

DatasetSplit split_by_patient(const std::vector<MotionSegment>& segments, const SplitRatios& ratios,
                              std::uint64_t seed) {
  std::set<std::string> unique;
  for (const MotionSegment& s : segments) unique.insert(s.patient_id);
  std::vector<std::string> patients(unique.begin(), unique.end());
  const auto sizes = split_sizes(patients.size(), ratios);

  // Fisher-Yates with a plain modulo draw keeps the order independent of the
  // standard library's distribution implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = patients.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(patients[i - 1], patients[j]);
  }

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < patients.size(); ++i) {
    const SplitKind kind = i < sizes[0] ? SplitKind::train
                           : i < sizes[0] + sizes[1] ? SplitKind::val
                                                      : SplitKind::test;
    split.assignment[patients[i]] = kind;
  }
  for (const MotionSegment& s : segments) {
    switch (split.assignment.at(s.patient_id)) {
      case SplitKind::train: split.train.push_back(s); break;
      case SplitKind::val: split.val.push_back(s); break;
      case SplitKind::test: split.test.push_back(s); break;
    }
  }
  return split;
}

}  // namespace gaitformer

// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gaitformer {

/// Malformed input files or data that fails preprocessing.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Joint { hip, knee, ankle, big_toe };
enum class Side { left, right, both };

struct JointId {
  Joint joint;
  Side side;  // left or right
  friend bool operator==(const JointId&, const JointId&) = default;
};

inline constexpr Joint kCanonicalJoints[] = {Joint::hip, Joint::knee, Joint::ankle, Joint::big_toe};

std::string_view to_string(Joint j);
std::string_view side_code(Side s);  // "L", "R" or "both"
Side parse_side(std::string_view text);

/// Canonical joint order for a side selection: hip, knee, ankle, big toe,
/// left joints first when both sides are requested.
std::vector<JointId> joint_layout(Side side);

/// Keypoint trajectories of one video. Coordinates are stored frame-major:
/// coords[(frame * joints + joint) * 2 + {0: x, 1: y}].
struct MotionSequence {
  std::string video_id;
  std::string patient_id;
  Side side = Side::left;
  double frame_rate = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::vector<JointId> joints;
  std::vector<double> coords;

  std::size_t joint_count() const { return joints.size(); }
  std::size_t frame_count() const { return joints.empty() ? 0 : coords.size() / (2 * joints.size()); }
  double& x(std::size_t frame, std::size_t joint) { return coords[(frame * joints.size() + joint) * 2]; }
  double& y(std::size_t frame, std::size_t joint) { return coords[(frame * joints.size() + joint) * 2 + 1]; }
  double x(std::size_t frame, std::size_t joint) const { return coords[(frame * joints.size() + joint) * 2]; }
  double y(std::size_t frame, std::size_t joint) const { return coords[(frame * joints.size() + joint) * 2 + 1]; }
};

struct KeypointOptions {
  Side side = Side::left;
  /// A joint missing in more than this fraction of frames rejects the file.
  double max_missing_fraction = 0.2;
  /// When set, coordinates outside [0, width] x [0, height] count as missing.
  std::optional<std::pair<double, double>> resolution;
};

/// Reads a `frame,joint,side,x,y,confidence` CSV. Frames span the smallest to
/// the largest index present. A keypoint is missing when its row is absent,
/// x or y is empty or non-finite, or confidence is 0. Interior gaps are
/// filled by linear interpolation, leading and trailing gaps by the nearest
/// observed frame.
MotionSequence load_keypoints(const std::filesystem::path& path, const KeypointOptions& options = {});

/// Writes every joint of `seq` in the keypoint CSV format with confidence 1.
void write_keypoints(const std::filesystem::path& path, const MotionSequence& seq);

/// Divides by the source resolution, then translates so the mean hip
/// position over the sequence is the origin. The result has unit resolution.
MotionSequence normalize(MotionSequence seq);

}  // namespace gaitformer

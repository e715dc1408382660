// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <fmt/os.h>

#include "csv.hpp"

namespace gaitformer {

std::string_view to_string(Joint j) {
  switch (j) {
    case Joint::hip: return "hip";
    case Joint::knee: return "knee";
    case Joint::ankle: return "ankle";
    case Joint::big_toe: return "bigtoe";
  }
  return "?";
}

std::string_view side_code(Side s) {
  switch (s) {
    case Side::left: return "L";
    case Side::right: return "R";
    case Side::both: return "both";
  }
  return "?";
}

Side parse_side(std::string_view text) {
  if (text == "L" || text == "l" || text == "left") return Side::left;
  if (text == "R" || text == "r" || text == "right") return Side::right;
  if (text == "both" || text == "B") return Side::both;
  throw DataError(fmt::format("unknown side '{}' (expected L, R or both)", text));
}

std::vector<JointId> joint_layout(Side side) {
  std::vector<JointId> layout;
  const auto append = [&](Side s) {
    for (Joint j : kCanonicalJoints) layout.push_back({j, s});
  };
  if (side == Side::both) {
    append(Side::left);
    append(Side::right);
  } else {
    append(side);
  }
  return layout;
}

namespace {

std::optional<Joint> parse_joint(std::string_view text) {
  if (text == "hip") return Joint::hip;
  if (text == "knee") return Joint::knee;
  if (text == "ankle") return Joint::ankle;
  if (text == "bigtoe" || text == "big_toe") return Joint::big_toe;
  return std::nullopt;
}

// Fills NaN gaps of one joint coordinate track in place.
void fill_gaps(std::vector<double>& track) {
  const std::size_t n = track.size();
  std::size_t prev = n;  // index of last observed value
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(track[i])) continue;
    if (prev == n) {
      for (std::size_t j = 0; j < i; ++j) track[j] = track[i];
    } else if (i > prev + 1) {
      const double span = static_cast<double>(i - prev);
      for (std::size_t j = prev + 1; j < i; ++j) {
        const double t = static_cast<double>(j - prev) / span;
        track[j] = track[prev] + t * (track[i] - track[prev]);
      }
    }
    prev = i;
  }
  if (prev != n) {
    for (std::size_t j = prev + 1; j < n; ++j) track[j] = track[prev];
  }
}

}  // namespace

MotionSequence load_keypoints(const std::filesystem::path& path, const KeypointOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open keypoint file {}", path.string()));

  const std::vector<JointId> layout = joint_layout(options.side);
  const auto slot_of = [&](JointId id) -> std::optional<std::size_t> {
    auto it = std::find(layout.begin(), layout.end(), id);
    if (it == layout.end()) return std::nullopt;
    return static_cast<std::size_t>(it - layout.begin());
  };

  // frame index -> per-slot (x, y), NaN when missing
  std::map<long long, std::vector<double>> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  csv::Reader reader(in, path.string());
  reader.expect_header({"frame", "joint", "side", "x", "y", "confidence"});
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 6) reader.fail(fmt::format("expected 6 fields, got {}", fields.size()));
    const long long frame = reader.parse_int(fields[0], "frame");
    if (frame < 0) reader.fail("frame index must be non-negative");
    const auto joint = parse_joint(fields[1]);
    if (!joint) reader.fail(fmt::format("unknown joint '{}'", fields[1]));
    Side side;
    if (fields[2] == "L") {
      side = Side::left;
    } else if (fields[2] == "R") {
      side = Side::right;
    } else {
      reader.fail(fmt::format("side must be L or R, got '{}'", fields[2]));
    }
    auto& slots = rows.try_emplace(frame, std::vector<double>(layout.size() * 2, nan)).first->second;
    const auto slot = slot_of({*joint, side});
    if (!slot) continue;
    if (!std::isnan(slots[*slot * 2]) || !std::isnan(slots[*slot * 2 + 1])) {
      reader.fail(fmt::format("duplicate keypoint {} {} at frame {}", fields[1], fields[2], frame));
    }
    const auto x = reader.parse_optional_double(fields[3], "x");
    const auto y = reader.parse_optional_double(fields[4], "y");
    const auto confidence = reader.parse_optional_double(fields[5], "confidence");
    bool present = x && y && std::isfinite(*x) && std::isfinite(*y);
    if (confidence && *confidence == 0.0) present = false;
    if (present && options.resolution) {
      const auto [w, h] = *options.resolution;
      present = *x >= 0.0 && *x <= w && *y >= 0.0 && *y <= h;
    }
    if (present) {
      slots[*slot * 2] = *x;
      slots[*slot * 2 + 1] = *y;
    }
  }
  if (rows.empty()) throw DataError(fmt::format("{}: no keypoint rows", path.string()));

  const long long first = rows.begin()->first;
  const long long last = rows.rbegin()->first;
  const auto frames = static_cast<std::size_t>(last - first + 1);

  MotionSequence seq;
  seq.side = options.side;
  seq.joints = layout;
  if (options.resolution) std::tie(seq.width, seq.height) = *options.resolution;
  seq.coords.assign(frames * layout.size() * 2, nan);
  for (const auto& [frame, slots] : rows) {
    std::copy(slots.begin(), slots.end(), seq.coords.begin() + static_cast<std::ptrdiff_t>((frame - first) * layout.size() * 2));
  }

  std::vector<double> track(frames);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    std::size_t missing = 0;
    for (std::size_t f = 0; f < frames; ++f) missing += std::isnan(seq.x(f, j)) ? 1 : 0;
    if (static_cast<double>(missing) > options.max_missing_fraction * static_cast<double>(frames)) {
      throw DataError(fmt::format("{}: joint {} ({}) missing in {} of {} frames (limit {:.0f}%)",
                                  path.string(), to_string(layout[j].joint), side_code(layout[j].side),
                                  missing, frames, options.max_missing_fraction * 100.0));
    }
    for (int c = 0; c < 2; ++c) {
      for (std::size_t f = 0; f < frames; ++f) track[f] = seq.coords[(f * layout.size() + j) * 2 + c];
      fill_gaps(track);
      for (std::size_t f = 0; f < frames; ++f) seq.coords[(f * layout.size() + j) * 2 + c] = track[f];
    }
  }
  return seq;
}

void write_keypoints(const std::filesystem::path& path, const MotionSequence& seq) {
  auto out = fmt::output_file(path.string());
  out.print("frame,joint,side,x,y,confidence\n");
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    for (std::size_t j = 0; j < seq.joint_count(); ++j) {
      out.print("{},{},{},{:.4f},{:.4f},1\n", f, to_string(seq.joints[j].joint),
                side_code(seq.joints[j].side), seq.x(f, j), seq.y(f, j));
    }
  }
}

MotionSequence normalize(MotionSequence seq) {
  if (!(seq.width > 0.0) || !(seq.height > 0.0)) {
    throw DataError(fmt::format("normalize: resolution must be positive, got {}x{}", seq.width, seq.height));
  }
  const std::size_t frames = seq.frame_count();
  if (frames == 0) throw DataError("normalize: empty sequence");
  for (std::size_t i = 0; i < seq.coords.size(); i += 2) {
    seq.coords[i] /= seq.width;
    seq.coords[i + 1] /= seq.height;
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < seq.joint_count(); ++j) {
    if (seq.joints[j].joint != Joint::hip) continue;
    for (std::size_t f = 0; f < frames; ++f) {
      mean_x += seq.x(f, j);
      mean_y += seq.y(f, j);
      ++count;
    }
  }
  if (count == 0) throw DataError("normalize: sequence has no hip joint");
  mean_x /= static_cast<double>(count);
  mean_y /= static_cast<double>(count);
  for (std::size_t i = 0; i < seq.coords.size(); i += 2) {
    seq.coords[i] -= mean_x;
    seq.coords[i + 1] -= mean_y;
  }
  seq.width = 1.0;
  seq.height = 1.0;
  return seq;
}

}  // namespace gaitformer

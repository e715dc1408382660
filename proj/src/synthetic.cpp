// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <system_error>

#include <fmt/format.h>

#include "gaitformer/dataset.hpp"
#include "gaitformer/model_config.hpp"

namespace gaitformer {

void SyntheticSpec::validate() const {
  const auto range = [](const char* name, double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) {
      throw ConfigError(fmt::format("{} range must be positive and non-empty, got [{}, {}]", name, lo, hi));
    }
  };
  if (samples < 1) throw ConfigError("synthetic samples must be >= 1");
  if (frames < 2) throw ConfigError("synthetic frames must be >= 2");
  if (videos_per_patient < 1) throw ConfigError("videos_per_patient must be >= 1");
  if (!(frame_rate > 0.0)) throw ConfigError("frame_rate must be positive");
  range("cadence", cadence_min, cadence_max);
  range("speed", speed_min, speed_max);
  range("amplitude", amplitude_min, amplitude_max);
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (!(width > 0.0) || !(height > 0.0)) throw ConfigError("resolution must be positive");
  if (!(pixels_per_meter > 0.0)) throw ConfigError("pixels_per_meter must be positive");
}

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

SyntheticSample generate_one(const SyntheticSpec& spec, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  const auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  SyntheticSample sample;
  SyntheticTargets& t = sample.targets;
  t.speed = uniform(spec.speed_min, spec.speed_max);
  t.cadence = uniform(spec.cadence_min, spec.cadence_max);
  t.amplitude = uniform(spec.amplitude_min, spec.amplitude_max);
  const double phase0 = uniform(0.0, 2.0 * std::numbers::pi);

  MotionSequence& m = sample.sequence;
  m.video_id = fmt::format("V{:04}", index);
  m.patient_id = fmt::format("P{:04}", index / spec.videos_per_patient);
  m.side = Side::both;
  m.frame_rate = spec.frame_rate;
  m.width = spec.width;
  m.height = spec.height;
  m.joints = joint_layout(Side::both);
  m.coords.resize(spec.frames * m.joints.size() * 2);

  const double ppm = spec.pixels_per_meter;
  const double travel = t.speed * ppm * static_cast<double>(spec.frames - 1) / spec.frame_rate;
  const double start_x = (spec.width - travel) / 2.0;
  const double hip_height = 0.3 * spec.height;
  const double swing = kThighSwingDegrees * kDegree;
  const double flexion = t.amplitude * kDegree;

  for (std::size_t f = 0; f < spec.frames; ++f) {
    const double time = static_cast<double>(f) / spec.frame_rate;
    const double phase = 2.0 * std::numbers::pi * t.cadence * time + phase0;
    const double hip_x = start_x + t.speed * ppm * time;
    const double hip_y = hip_height + 0.015 * ppm * std::cos(2.0 * phase);
    for (int leg = 0; leg < 2; ++leg) {
      const double p = phase + leg * std::numbers::pi;
      const double thigh = swing * std::sin(p);
      const double knee_bend = flexion * (1.0 - std::cos(p + std::numbers::pi / 2.0)) / 2.0;
      const double shank = thigh - knee_bend;
      const double knee_x = hip_x + kThighLength * ppm * std::sin(thigh);
      const double knee_y = hip_y + kThighLength * ppm * std::cos(thigh);
      const double ankle_x = knee_x + kShankLength * ppm * std::sin(shank);
      const double ankle_y = knee_y + kShankLength * ppm * std::cos(shank);
      const double toe_x = ankle_x + kFootLength * ppm * std::cos(shank);
      const double toe_y = ankle_y - kFootLength * ppm * std::sin(shank);
      const std::size_t base = static_cast<std::size_t>(leg) * 4;
      m.x(f, base + 0) = hip_x;
      m.y(f, base + 0) = hip_y;
      m.x(f, base + 1) = knee_x;
      m.y(f, base + 1) = knee_y;
      m.x(f, base + 2) = ankle_x;
      m.y(f, base + 2) = ankle_y;
      m.x(f, base + 3) = toe_x;
      m.y(f, base + 3) = toe_y;
    }
  }

  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (double& v : m.coords) v += noise(rng);
  }
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t j = 0; j < m.joint_count(); ++j) {
      if (m.x(f, j) < 0.0 || m.x(f, j) > spec.width || m.y(f, j) < 0.0 || m.y(f, j) > spec.height) {
        throw ConfigError(fmt::format(
            "synthetic walker {} leaves the {}x{} frame at frame {}; lower pixels_per_meter or speed",
            m.video_id, spec.width, spec.height, f));
      }
    }
  }
  return sample;
}

}  // namespace

std::vector<SyntheticSample> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<SyntheticSample> samples;
  samples.reserve(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) samples.push_back(generate_one(spec, i));
  return samples;
}

std::filesystem::path write_synthetic(const std::filesystem::path& dir,
                                      const std::vector<SyntheticSample>& samples) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "keypoints", ec);
  if (ec) throw DataError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));

  std::vector<ManifestEntry> entries;
  try {
    for (const SyntheticSample& s : samples) {
      const std::filesystem::path relative = std::filesystem::path("keypoints") / (s.sequence.video_id + ".csv");
      write_keypoints(dir / relative, s.sequence);
      ManifestEntry e;
      e.video_id = s.sequence.video_id;
      e.patient_id = s.sequence.patient_id;
      e.keypoint_path = relative;
      e.frame_rate = s.sequence.frame_rate;
      e.width = s.sequence.width;
      e.height = s.sequence.height;
      e.side = Side::left;
      e.knee_flexion = s.targets.amplitude;
      e.speed = s.targets.speed;
      e.cadence = s.targets.cadence;
      entries.push_back(std::move(e));
    }
    const std::filesystem::path manifest = dir / "manifest.csv";
    write_manifest(manifest, entries);
    return manifest;
  } catch (const std::system_error& e) {
    throw DataError(fmt::format("cannot write synthetic dataset to {}: {}", dir.string(), e.what()));
  }
}

}  // namespace gaitformer

// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitformer {

/// Correlation is undefined for a constant series or fewer than two points.
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pearson product-moment correlation.
double pearson(std::span<const double> x, std::span<const double> y);

/// Mean absolute error.
double mae(std::span<const double> pred, std::span<const double> target);

struct EvalRow {
  std::string segment_id;  // <video_id>@<start frame>
  std::string video_id;
  double prediction = 0.0;
  double target = 0.0;
};

struct EvalReport {
  std::string task;
  std::vector<EvalRow> rows;
  double correlation = 0.0;
  double mae = 0.0;
  std::size_t n = 0;

  /// Segment-level statistics over `rows`. Correlation is NaN when
  /// undefined; empty rows throw MetricError.
  static EvalReport from_rows(std::string task, std::vector<EvalRow> rows);

  /// One row per video: mean prediction against the video's target, in
  /// first-appearance order.
  EvalReport per_video() const;

  /// `task,correlation,mae,n`
  std::string summary_line() const;
  /// Writes `segment_id,prediction,target` rows.
  void write_csv(const std::filesystem::path& path) const;
};

}  // namespace gaitformer

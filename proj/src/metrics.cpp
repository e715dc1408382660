// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <fmt/os.h>

namespace gaitformer {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument(fmt::format("pearson: length mismatch {} vs {}", x.size(), y.size()));
  }
  if (x.size() < 2) throw MetricError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw MetricError("pearson: correlation undefined for a constant series");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double mae(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument(fmt::format("mae: length mismatch {} vs {}", pred.size(), target.size()));
  }
  if (pred.empty()) throw MetricError("mae: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - target[i]);
  return total / static_cast<double>(pred.size());
}

EvalReport EvalReport::from_rows(std::string task, std::vector<EvalRow> rows) {
  EvalReport report;
  report.task = std::move(task);
  report.rows = std::move(rows);
  report.n = report.rows.size();
  std::vector<double> pred;
  std::vector<double> target;
  for (const EvalRow& r : report.rows) {
    pred.push_back(r.prediction);
    target.push_back(r.target);
  }
  report.mae = gaitformer::mae(pred, target);
  try {
    report.correlation = pearson(pred, target);
  } catch (const MetricError&) {
    report.correlation = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

EvalReport EvalReport::per_video() const {
  std::vector<EvalRow> videos;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> counts;
  for (const EvalRow& r : rows) {
    auto [it, inserted] = index.try_emplace(r.video_id, videos.size());
    if (inserted) {
      videos.push_back({r.video_id, r.video_id, 0.0, r.target});
      counts.push_back(0);
    }
    videos[it->second].prediction += r.prediction;
    counts[it->second] += 1;
  }
  for (std::size_t i = 0; i < videos.size(); ++i) videos[i].prediction /= static_cast<double>(counts[i]);
  return from_rows(task, std::move(videos));
}

std::string EvalReport::summary_line() const {
  return fmt::format("{},{:.6f},{:.6f},{}", task, correlation, mae, n);
}

void EvalReport::write_csv(const std::filesystem::path& path) const {
  auto out = fmt::output_file(path.string());
  out.print("segment_id,prediction,target\n");
  for (const EvalRow& r : rows) out.print("{},{},{}\n", r.segment_id, r.prediction, r.target);
}

}  // namespace gaitformer

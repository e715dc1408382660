// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/attention_export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <system_error>

#include <fmt/format.h>
#include <fmt/os.h>

#include "gaitformer/keypoints.hpp"

namespace gaitformer {

namespace {

void require_square(const Tensor& matrix) {
  if (matrix.shape().size() != 2 || matrix.shape()[0] != matrix.shape()[1]) {
    throw ShapeError(fmt::format("attention matrix must be square, got {}", to_string(matrix.shape())));
  }
}

}  // namespace

std::string attention_stem(const AttentionRecord& record) {
  if (record.block == AttentionBlockKind::spatial) {
    return fmt::format("spatial_l{}_h{}_f{}", record.layer, record.head, record.frame.value_or(0));
  }
  return fmt::format("temporal_l{}_h{}", record.layer, record.head);
}

void write_attention_csv(const std::filesystem::path& path, const Tensor& matrix) {
  require_square(matrix);
  const std::size_t n = matrix.shape()[0];
  try {
    auto out = fmt::output_file(path.string());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j > 0) out.print(",");
        out.print("{}", matrix[i * n + j]);
      }
      out.print("\n");
    }
  } catch (const std::system_error& e) {
    throw DataError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
}

void write_attention_svg(const std::filesystem::path& path, const Tensor& matrix, const std::string& title) {
  require_square(matrix);
  const std::size_t n = matrix.shape()[0];
  const auto [lo_it, hi_it] = std::minmax_element(matrix.values().begin(), matrix.values().end());
  const double lo = *lo_it;
  const double range = *hi_it - *lo_it;
  const double cell = std::max(4.0, std::floor(480.0 / static_cast<double>(n)));
  const double side = cell * static_cast<double>(n);
  const double top = 24.0;

  try {
    auto out = fmt::output_file(path.string());
    out.print("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" shape-rendering=\"crispEdges\">\n",
              side, side + top);
    out.print("<text x=\"2\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">{} (min {:.4g}, max {:.4g})</text>\n",
              title, lo, *hi_it);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double t = range > 0.0 ? (matrix[i * n + j] - lo) / range : 0.0;
        // White (t = 0) to #08306b (t = 1).
        const auto channel = [t](int dark) { return static_cast<int>(std::lround(255.0 + (dark - 255.0) * t)); };
        out.print("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n",
                  cell * static_cast<double>(j), top + cell * static_cast<double>(i), cell, cell, channel(0x08),
                  channel(0x30), channel(0x6b));
      }
    }
    out.print("</svg>\n");
  } catch (const std::system_error& e) {
    throw DataError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
}

std::vector<std::filesystem::path> export_attention(const std::vector<AttentionRecord>& records,
                                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> written;
  for (const AttentionRecord& r : records) {
    const std::string stem = attention_stem(r);
    write_attention_csv(dir / (stem + ".csv"), r.matrix);
    write_attention_svg(dir / (stem + ".svg"), r.matrix, stem);
    written.push_back(dir / (stem + ".csv"));
  }
  return written;
}

}  // namespace gaitformer

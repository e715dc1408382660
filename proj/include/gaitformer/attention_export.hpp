// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gaitformer/model.hpp"

namespace gaitformer {

/// File stem for a record: `spatial_l0_h1_f46` or `temporal_l0_h1`.
std::string attention_stem(const AttentionRecord& record);

/// Comma-separated matrix rows, values in shortest round-trip form.
void write_attention_csv(const std::filesystem::path& path, const Tensor& matrix);

/// Heatmap with one cell per entry, shaded white to dark blue after scaling
/// the matrix's own min..max onto the ramp.
void write_attention_svg(const std::filesystem::path& path, const Tensor& matrix, const std::string& title);

/// Writes `<stem>.csv` and `<stem>.svg` per record; returns the CSV paths.
std::vector<std::filesystem::path> export_attention(const std::vector<AttentionRecord>& records,
                                                    const std::filesystem::path& dir);

}  // namespace gaitformer

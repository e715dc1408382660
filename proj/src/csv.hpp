// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "gaitformer/keypoints.hpp"

namespace gaitformer::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Plain comma splitting; the formats read here never quote fields.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void expect_header(std::initializer_list<std::string_view> columns) {
    std::vector<std::string> fields;
    if (!next(fields)) fail("missing header");
    const bool ok = fields.size() == columns.size() &&
                    std::equal(fields.begin(), fields.end(), columns.begin());
    if (!ok) fail(fmt::format("expected header '{}'", fmt::join(columns, ",")));
  }

  /// Next non-blank line split into fields; false at end of input.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (trim(line).empty()) continue;
      fields = split(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw DataError(fmt::format("{}:{}: {}", source_, line_, message));
  }

  long long parse_int(std::string_view text, const char* what) const {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(fmt::format("invalid {} '{}'", what, text));
    }
    return value;
  }

  double parse_double(std::string_view text, const char* what) const {
    const auto value = parse_optional_double(text, what);
    if (!value) fail(fmt::format("missing {}", what));
    return *value;
  }

  /// Empty text is absent; "nan" parses to NaN.
  std::optional<double> parse_optional_double(std::string_view text, const char* what) const {
    if (text.empty()) return std::nullopt;
    if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(fmt::format("invalid {} '{}'", what, text));
    }
    return value;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

}  // namespace gaitformer::csv

// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "csv.hpp"

namespace gaitformer {

namespace {

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("invalid value '{}' for {}", text, key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("invalid boolean '{}' for {}", text, key));
}

}  // namespace

SgdrSchedule RunConfig::schedule() const {
  const bool fast = task == Task::speed || task == Task::cadence;
  SgdrSchedule s;
  s.lr_max = lr_max.value_or(fast ? 6e-4 : 3e-4);
  s.lr_min = lr_min.value_or(fast ? 1e-4 : 8e-5);
  s.cycle_epochs = cycle_epochs;
  s.cycle_mult = cycle_mult;
  return s;
}

SegmentOptions RunConfig::segment_options() const {
  return SegmentOptions{model.frames, window_offset, end_aligned, max_missing_fraction, side};
}

void RunConfig::finalize() {
  model.joints = task_joint_count(task);
  model.validate();
  schedule().validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (window_offset < 1) throw ConfigError("window_offset must be >= 1");
  if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || !(ratios.test > 0.0)) {
    throw ConfigError("split ratios must be positive");
  }
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction <= 1.0)) {
    throw ConfigError("max_missing_fraction must lie in [0, 1]");
  }
}

void RunConfig::set(std::string_view key, std::string_view value) {
  try {
    if (key == "task") {
      task = parse_task(value);
    } else if (key == "frames") {
      model.frames = parse_number<std::size_t>(key, value);
    } else if (key == "embed_dim") {
      model.embed_dim = parse_number<std::size_t>(key, value);
    } else if (key == "layers") {
      model.layers = parse_number<std::size_t>(key, value);
    } else if (key == "heads") {
      model.heads = parse_number<std::size_t>(key, value);
    } else if (key == "mlp_ratio") {
      model.mlp_ratio = parse_number<std::size_t>(key, value);
    } else if (key == "head_hidden") {
      model.head_hidden = parse_number<std::size_t>(key, value);
    } else if (key == "activation") {
      model.activation = parse_activation(value);
    } else if (key == "eps") {
      model.eps = parse_number<double>(key, value);
    } else if (key == "mlp_input") {
      model.mlp_input = parse_mlp_input(value);
    } else if (key == "scale") {
      model.scale = parse_attention_scale(value);
    } else if (key == "lr_max") {
      lr_max = parse_number<double>(key, value);
    } else if (key == "lr_min") {
      lr_min = parse_number<double>(key, value);
    } else if (key == "cycle_epochs") {
      cycle_epochs = parse_number<std::int64_t>(key, value);
    } else if (key == "cycle_mult") {
      cycle_mult = parse_number<std::int64_t>(key, value);
    } else if (key == "epochs") {
      epochs = parse_number<std::size_t>(key, value);
    } else if (key == "batch_size") {
      batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "manifest") {
      manifest = std::string(value);
    } else if (key == "output_dir") {
      output_dir = std::string(value);
    } else if (key == "split") {
      std::string text(value);
      std::replace(text.begin(), text.end(), ':', ',');
      const std::vector<std::string> fields = csv::split(text);
      if (fields.size() != 3) throw ConfigError(fmt::format("split must be train:val:test, got '{}'", value));
      ratios = {parse_number<double>(key, fields[0]), parse_number<double>(key, fields[1]),
                parse_number<double>(key, fields[2])};
    } else if (key == "eval_every") {
      eval_every = parse_number<std::size_t>(key, value);
    } else if (key == "window_offset") {
      window_offset = parse_number<std::size_t>(key, value);
    } else if (key == "end_aligned") {
      end_aligned = parse_bool(key, value);
    } else if (key == "max_missing_fraction") {
      max_missing_fraction = parse_number<double>(key, value);
    } else if (key == "side") {
      if (value == "any") {
        side.reset();
      } else {
        side = parse_side(value);
        if (*side == Side::both) throw ConfigError("side must be L, R or any");
      }
    } else if (key == "standardize_targets") {
      standardize_targets = parse_bool(key, value);
    } else {
      throw ConfigError(fmt::format("unknown setting '{}'", key));
    }
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  const SgdrSchedule s = schedule();
  return {
      {"task", std::string(to_string(task))},
      {"frames", fmt::format("{}", model.frames)},
      {"embed_dim", fmt::format("{}", model.embed_dim)},
      {"layers", fmt::format("{}", model.layers)},
      {"heads", fmt::format("{}", model.heads)},
      {"mlp_ratio", fmt::format("{}", model.mlp_ratio)},
      {"head_hidden", fmt::format("{}", model.head_hidden)},
      {"activation", std::string(to_string(model.activation))},
      {"eps", fmt::format("{}", model.eps)},
      {"mlp_input", std::string(to_string(model.mlp_input))},
      {"scale", std::string(to_string(model.scale))},
      {"lr_max", fmt::format("{}", s.lr_max)},
      {"lr_min", fmt::format("{}", s.lr_min)},
      {"cycle_epochs", fmt::format("{}", cycle_epochs)},
      {"cycle_mult", fmt::format("{}", cycle_mult)},
      {"epochs", fmt::format("{}", epochs)},
      {"batch_size", fmt::format("{}", batch_size)},
      {"seed", fmt::format("{}", seed)},
      {"manifest", manifest.string()},
      {"output_dir", output_dir.string()},
      {"split", fmt::format("{}:{}:{}", ratios.train, ratios.val, ratios.test)},
      {"eval_every", fmt::format("{}", eval_every)},
      {"window_offset", fmt::format("{}", window_offset)},
      {"end_aligned", end_aligned ? "true" : "false"},
      {"max_missing_fraction", fmt::format("{}", max_missing_fraction)},
      {"side", side ? std::string(side_code(*side)) : std::string("any")},
      {"standardize_targets", standardize_targets ? "true" : "false"},
  };
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view text = csv::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key=value", path.string(), number));
    }
    try {
      base.set(csv::trim(text.substr(0, eq)), csv::trim(text.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
  }
  return base;
}

}  // namespace gaitformer

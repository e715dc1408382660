// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/checkpoint.hpp"

#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include <json.hpp>

namespace gaitformer {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "gaitformer-checkpoint";
constexpr int kVersion = 1;

json tensors_to_json(const ModelParams& params) {
  json out = json::array();
  for_each_param(
      [&out](const std::string& name, const Tensor& t) {
        out.push_back({{"name", name}, {"shape", t.shape()}, {"values", t.values()}});
      },
      params);
  return out;
}

// Fills `params` (already laid out for the stored config) in visiting order,
// checking names and shapes against what the model expects.
void tensors_from_json(const json& array, ModelParams& params, const char* what) {
  if (!array.is_array()) throw CheckpointError(fmt::format("{}: expected an array of tensors", what));
  std::size_t index = 0;
  for_each_param(
      [&](const std::string& name, Tensor& t) {
        if (index >= array.size()) throw CheckpointError(fmt::format("{}: missing tensor {}", what, name));
        const json& entry = array[index++];
        const std::string stored = entry.at("name").get<std::string>();
        if (stored != name) {
          throw CheckpointError(fmt::format("{}: expected tensor {}, found {}", what, name, stored));
        }
        Shape shape = entry.at("shape").get<Shape>();
        std::vector<double> values = entry.at("values").get<std::vector<double>>();
        if (shape != t.shape()) {
          throw CheckpointError(fmt::format("{}: tensor {} has shape {}, config implies {}", what, name,
                                            to_string(shape), to_string(t.shape())));
        }
        if (values.size() != numel(shape)) {
          throw CheckpointError(fmt::format("{}: tensor {} holds {} values for shape {}", what, name,
                                            values.size(), to_string(shape)));
        }
        t = Tensor(std::move(shape), std::move(values));
      },
      params);
  if (index != array.size()) {
    throw CheckpointError(fmt::format("{}: {} unexpected trailing tensors", what, array.size() - index));
  }
}

json model_to_json(const ModelConfig& c) {
  return {{"frames", c.frames},
          {"joints", c.joints},
          {"embed_dim", c.embed_dim},
          {"layers", c.layers},
          {"heads", c.heads},
          {"mlp_ratio", c.mlp_ratio},
          {"head_hidden", c.head_hidden},
          {"activation", to_string(c.activation)},
          {"eps", c.eps},
          {"mlp_input", to_string(c.mlp_input)},
          {"scale", to_string(c.scale)}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig c;
  c.frames = j.at("frames").get<std::size_t>();
  c.joints = j.at("joints").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.mlp_ratio = j.at("mlp_ratio").get<std::size_t>();
  c.head_hidden = j.at("head_hidden").get<std::size_t>();
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.eps = j.at("eps").get<double>();
  c.mlp_input = parse_mlp_input(j.at("mlp_input").get<std::string>());
  c.scale = parse_attention_scale(j.at("scale").get<std::string>());
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  json run = json::object();
  for (const auto& [key, value] : checkpoint.run.entries()) run[key] = value;
  const AdamState& adam = checkpoint.state.adam;
  const json doc = {
      {"format", kFormat},
      {"version", kVersion},
      {"model", model_to_json(checkpoint.run.model)},
      {"run", std::move(run)},
      {"epoch", checkpoint.state.epoch},
      {"rng_state", checkpoint.state.rng_state},
      {"target_scaler", {{"mean", checkpoint.scaler.mean}, {"scale", checkpoint.scaler.scale}}},
      {"params", tensors_to_json(checkpoint.state.params)},
      {"adam",
       {{"step", adam.step},
        {"beta1", adam.beta1},
        {"beta2", adam.beta2},
        {"eps", adam.eps},
        {"m", tensors_to_json(adam.m)},
        {"v", tensors_to_json(adam.v)}}},
  };

  // Write beside the target and rename so a crash never leaves half a file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(fmt::format("cannot write checkpoint {}", path.string()));
    out << doc.dump() << '\n';
    if (!out) throw CheckpointError(fmt::format("error while writing checkpoint {}", path.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError(fmt::format("cannot move checkpoint into place at {}: {}", path.string(), ec.message()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open checkpoint {}", path.string()));
  try {
    const json doc = json::parse(in);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw CheckpointError(fmt::format("{} is not a gaitformer checkpoint", path.string()));
    }
    if (const int version = doc.at("version").get<int>(); version != kVersion) {
      throw CheckpointError(fmt::format("{}: unsupported checkpoint version {}", path.string(), version));
    }

    Checkpoint c;
    for (const auto& [key, value] : doc.at("run").items()) c.run.set(key, value.get<std::string>());
    c.run.model = model_from_json(doc.at("model"));
    c.run.model.validate();
    c.state.epoch = doc.at("epoch").get<std::size_t>();
    c.state.rng_state = doc.at("rng_state").get<std::string>();
    c.scaler.mean = doc.at("target_scaler").at("mean").get<double>();
    c.scaler.scale = doc.at("target_scaler").at("scale").get<double>();

    const ModelParams layout = init_params(c.run.model, 0);
    c.state.params = layout;
    tensors_from_json(doc.at("params"), c.state.params, "params");
    const json& adam = doc.at("adam");
    c.state.adam = AdamState::for_params(layout);
    c.state.adam.step = adam.at("step").get<std::int64_t>();
    c.state.adam.beta1 = adam.at("beta1").get<double>();
    c.state.adam.beta2 = adam.at("beta2").get<double>();
    c.state.adam.eps = adam.at("eps").get<double>();
    tensors_from_json(adam.at("m"), c.state.adam.m, "adam.m");
    tensors_from_json(adam.at("v"), c.state.adam.v, "adam.v");
    return c;
  } catch (const json::exception& e) {
    throw CheckpointError(fmt::format("{}: malformed checkpoint: {}", path.string(), e.what()));
  } catch (const ConfigError& e) {
    throw CheckpointError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace gaitformer

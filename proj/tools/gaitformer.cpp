// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gaitformer/commands.hpp"

namespace {

using namespace gaitformer;

// Settings accepted as `--set key=value`, applied after the config file.
RunConfig build_run_config(const std::string& config_file, const std::vector<std::string>& overrides) {
  RunConfig config = config_file.empty() ? RunConfig{} : load_run_config(config_file);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

struct CommonRun {
  std::string config_file;
  std::vector<std::string> overrides;
  std::vector<std::string> flags;  // key=value pairs from dedicated flags

  void add(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "override one setting, key=value (repeatable)");
  }

  // Dedicated flags behave exactly like --set and win over it.
  void flag(CLI::App* cmd, const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        name, [this, key](const std::string& v) { flags.push_back(key + "=" + v); }, help);
  }

  RunConfig resolve() const {
    std::vector<std::string> all = overrides;
    all.insert(all.end(), flags.begin(), flags.end());
    return build_run_config(config_file, all);
  }
};

void add_input(CLI::App* cmd, KeypointInput& input, std::string& side) {
  cmd->add_option("-k,--keypoints", input.path, "keypoint CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--width", input.width, "source video width in pixels")->required();
  cmd->add_option("--height", input.height, "source video height in pixels")->required();
  cmd->add_option("--side", side, "L or R for per-side tasks")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gait parameter regression from 2D keypoints with a spatio-temporal transformer"};
  app.require_subcommand(1);

  // train
  CommonRun train_run;
  std::string resume;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write checkpoints and a log");
  train_run.add(train_cmd);
  train_run.flag(train_cmd, "--task", "task", "gdi, knee_flexion, speed or cadence");
  train_run.flag(train_cmd, "-m,--manifest", "manifest", "manifest CSV");
  train_run.flag(train_cmd, "-o,--output", "output_dir", "output directory");
  train_run.flag(train_cmd, "--epochs", "epochs", "number of epochs");
  train_run.flag(train_cmd, "--seed", "seed", "seed for initialization, shuffling and the split");
  train_run.flag(train_cmd, "--batch-size", "batch_size", "mini-batch size");
  train_run.flag(train_cmd, "--side", "side", "L, R or any (per-side tasks)");
  train_cmd->add_option("--resume", resume, "continue from this checkpoint")->check(CLI::ExistingFile);

  // eval
  EvalOptions eval;
  std::string eval_split = "test";
  std::string eval_out;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on its val or test split");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-m,--manifest", eval.manifest, "manifest CSV (default: the training manifest)");
  eval_cmd->add_option("--split", eval_split, "val or test")->check(CLI::IsMember({"val", "test"}))->capture_default_str();
  eval_cmd->add_option("-o,--output", eval_out, "directory for the report files");

  // predict
  std::string predict_ckpt;
  KeypointInput predict_input;
  std::string predict_side = "L";
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict every window of one keypoint file");
  predict_cmd->add_option("--checkpoint", predict_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  add_input(predict_cmd, predict_input, predict_side);

  // export-attention
  ExportOptions exp;
  std::string export_side = "L";
  std::string export_block = "both";
  std::string export_out;
  CLI::App* export_cmd = app.add_subcommand("export-attention", "write attention matrices as CSV and SVG");
  export_cmd->add_option("--checkpoint", exp.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  add_input(export_cmd, exp.input, export_side);
  export_cmd->add_option("--window", exp.window, "window index")->capture_default_str();
  export_cmd->add_option("--frame", exp.frame, "frame within the window for spatial matrices")->capture_default_str();
  export_cmd->add_option("--block", export_block, "spatial, temporal or both")
      ->check(CLI::IsMember({"spatial", "temporal", "both"}))
      ->capture_default_str();
  export_cmd->add_option("-o,--output", export_out, "output directory")->required();

  // synth
  SyntheticSpec synth;
  std::string synth_out;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic walking dataset");
  synth_cmd->add_option("-o,--output", synth_out, "output directory")->required();
  synth_cmd->add_option("--samples", synth.samples, "number of videos")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--frames", synth.frames, "frames per video")->capture_default_str();
  synth_cmd->add_option("--videos-per-patient", synth.videos_per_patient, "videos per patient")->capture_default_str();
  synth_cmd->add_option("--frame-rate", synth.frame_rate, "frames per second")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise_sigma, "pixel noise sigma")->capture_default_str();
  synth_cmd->add_option("--speed-min", synth.speed_min, "m/s")->capture_default_str();
  synth_cmd->add_option("--speed-max", synth.speed_max, "m/s")->capture_default_str();
  synth_cmd->add_option("--cadence-min", synth.cadence_min, "strides/s")->capture_default_str();
  synth_cmd->add_option("--cadence-max", synth.cadence_max, "strides/s")->capture_default_str();
  synth_cmd->add_option("--amplitude-min", synth.amplitude_min, "degrees")->capture_default_str();
  synth_cmd->add_option("--amplitude-max", synth.amplitude_max, "degrees")->capture_default_str();
  synth_cmd->add_option("--width", synth.width, "image width")->capture_default_str();
  synth_cmd->add_option("--height", synth.height, "image height")->capture_default_str();
  synth_cmd->add_option("--pixels-per-meter", synth.pixels_per_meter, "scale")->capture_default_str();

  // count-params
  CommonRun count_run;
  bool verbose = false;
  CLI::App* count_cmd = app.add_subcommand("count-params", "print the number of learnable parameters");
  count_run.add(count_cmd);
  count_run.flag(count_cmd, "--task", "task", "task (sets the joint count)");
  count_cmd->add_flag("-v,--verbose", verbose, "list every tensor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "gaitformer: error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*train_cmd) {
      cmd_train(train_run.resolve(), std::cout,
                resume.empty() ? std::nullopt : std::optional<std::filesystem::path>(resume));
    } else if (*eval_cmd) {
      eval.split = parse_split(eval_split);
      if (!eval_out.empty()) eval.output_dir = eval_out;
      cmd_eval(eval, std::cout);
    } else if (*predict_cmd) {
      predict_input.side = parse_side(predict_side);
      cmd_predict(predict_ckpt, predict_input, std::cout);
    } else if (*export_cmd) {
      exp.input.side = parse_side(export_side);
      exp.spatial = export_block != "temporal";
      exp.temporal = export_block != "spatial";
      exp.output_dir = export_out;
      cmd_export_attention(exp, std::cout);
    } else if (*synth_cmd) {
      cmd_synth(synth, synth_out, std::cout);
    } else if (*count_cmd) {
      RunConfig config = count_run.resolve();
      config.model.joints = task_joint_count(config.task);
      cmd_count_params(config.model, verbose, std::cout);
    }
  } catch (const std::exception& e) {
    std::string message = e.what();
    for (char& ch : message) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "gaitformer: error: " << message << "\n";
    return 1;
  }
  return 0;
}

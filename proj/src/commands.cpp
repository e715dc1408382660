// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaitformer/commands.hpp"

#include <cmath>
#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <fmt/os.h>
#include <fmt/ostream.h>

#include "gaitformer/attention_export.hpp"
#include "gaitformer/model.hpp"

namespace gaitformer {

namespace {

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
}

std::vector<MotionSegment> load_task_segments(const RunConfig& config, const std::filesystem::path& manifest) {
  std::vector<MotionSegment> segments =
      build_segments(load_manifest(manifest), config.task, config.segment_options());
  if (segments.empty()) {
    throw DataError(fmt::format("manifest {} has no {} targets with at least {} frames", manifest.string(),
                                to_string(config.task), config.model.frames));
  }
  return segments;
}

void check_dims(const ModelConfig& model, std::span<const MotionSegment> segments) {
  const Shape expected{model.frames, model.joints, 2};
  for (const MotionSegment& s : segments) {
    if (s.values.shape() != expected) {
      throw ShapeError(fmt::format("checkpoint expects segments of shape {}, data for {} has {}", to_string(expected),
                                   s.video_id, to_string(s.values.shape())));
    }
  }
}

void write_split(const std::filesystem::path& path, const DatasetSplit& split) {
  auto out = fmt::output_file(path.string());
  out.print("patient_id,split\n");
  for (const auto& [patient, kind] : split.assignment) out.print("{},{}\n", patient, to_string(kind));
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : "-"; }

MotionSequence load_input(const Checkpoint& c, const KeypointInput& input) {
  return load_sequence(input.path, c.run.task, input.side, input.width, input.height, c.run.max_missing_fraction);
}

}  // namespace

TrainOutputs cmd_train(RunConfig config, std::ostream& out, const std::optional<std::filesystem::path>& resume) {
  config.finalize();
  if (config.manifest.empty()) throw ConfigError("no manifest given");
  if (config.output_dir.empty()) throw ConfigError("no output directory given");

  std::optional<Checkpoint> start;
  if (resume) {
    start = load_checkpoint(*resume);
    if (start->run.model != config.model || start->run.task != config.task) {
      throw ConfigError(fmt::format("checkpoint {} was trained with a different task or model", resume->string()));
    }
  }

  const DatasetSplit split =
      split_by_patient(load_task_segments(config, config.manifest), config.ratios, config.seed);
  fmt::print(out, "task {}: {} train / {} val / {} test segments, {} parameters\n", to_string(config.task),
             split.train.size(), split.val.size(), split.test.size(), count_params(config.model));

  make_dir(config.output_dir);
  TrainOutputs outputs;
  outputs.log = config.output_dir / "train_log.csv";
  outputs.best_checkpoint = config.output_dir / "best.ckpt";
  outputs.last_checkpoint = config.output_dir / "last.ckpt";
  outputs.split = config.output_dir / "split.csv";
  write_split(outputs.split, split);

  std::ofstream log(outputs.log, resume ? std::ios::app : std::ios::trunc);
  if (!log) throw DataError(fmt::format("cannot write {}", outputs.log.string()));
  if (!resume) log << log_header() << '\n';

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochLog& row, const TrainingSnapshot&) {
    log << log_row(row) << '\n' << std::flush;
    fmt::print(out, "epoch {:>4}  lr {:.3e}  train {:.6g}  val {}  r {}  mae {}\n", row.epoch, row.lr, row.train_loss,
               fmt_optional(row.val_loss), fmt_optional(row.val_correlation), fmt_optional(row.val_mae));
    out.flush();
  };
  outputs.result = train(config, split.train, split.val, hooks, start ? &start->state : nullptr);

  save_checkpoint(outputs.best_checkpoint, {config, outputs.result.best, outputs.result.scaler});
  save_checkpoint(outputs.last_checkpoint, {config, outputs.result.last, outputs.result.scaler});
  fmt::print(out, "best epoch {} (val mse {:.6g}); wrote {}\n", outputs.result.best.epoch,
             outputs.result.best_val_loss, config.output_dir.string());
  return outputs;
}

EvalReport cmd_eval(const EvalOptions& options, std::ostream& out) {
  const Checkpoint c = load_checkpoint(options.checkpoint);
  const std::filesystem::path manifest = options.manifest.value_or(c.run.manifest);
  if (manifest.empty()) throw ConfigError("no manifest given and none recorded in the checkpoint");
  if (c.run.model.joints != task_joint_count(c.run.task)) {
    throw ShapeError(fmt::format("checkpoint model has {} joints but task {} needs {}", c.run.model.joints,
                                 to_string(c.run.task), task_joint_count(c.run.task)));
  }

  const DatasetSplit split = split_by_patient(load_task_segments(c.run, manifest), c.run.ratios, c.run.seed);
  const std::vector<MotionSegment>& part = split.part(options.split);
  if (part.empty()) throw DataError(fmt::format("the {} split is empty", to_string(options.split)));
  check_dims(c.run.model, part);

  const EvalReport report = evaluate(c.state.params, c.run.model, c.scaler, part, c.run.task);
  fmt::print(out, "task,correlation,mae,n\n{}\n", report.summary_line());
  const EvalReport videos = report.per_video();
  fmt::print(out, "per video: {}\n", videos.summary_line());

  if (options.output_dir) {
    make_dir(*options.output_dir);
    const std::string stem = fmt::format("eval_{}", to_string(options.split));
    report.write_csv(*options.output_dir / (stem + ".csv"));
    auto summary = fmt::output_file((*options.output_dir / (stem + "_summary.csv")).string());
    summary.print("level,task,correlation,mae,n\nsegment,{}\nvideo,{}\n", report.summary_line(),
                  videos.summary_line());
  }
  return report;
}

std::vector<WindowPrediction> cmd_predict(const std::filesystem::path& checkpoint, const KeypointInput& input,
                                          std::ostream& out) {
  const Checkpoint c = load_checkpoint(checkpoint);
  const MotionSequence seq = load_input(c, input);
  const ModelConfig& model = c.run.model;
  if (seq.frame_count() < model.frames) {
    throw DataError(fmt::format("{} has {} frames; the model needs at least {}", input.path.string(),
                                seq.frame_count(), model.frames));
  }
  const std::vector<MotionSegment> windows = window_slice(seq, model.frames, c.run.window_offset, c.run.end_aligned);
  check_dims(model, windows);
  const std::vector<double> values = predict_segments(c.state.params, model, c.scaler, windows);

  std::vector<WindowPrediction> predictions;
  double mean = 0.0;
  fmt::print(out, "window,start,prediction\n");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    predictions.push_back({windows[i].start, values[i]});
    mean += values[i];
    fmt::print(out, "{},{},{}\n", i, windows[i].start, values[i]);
  }
  mean /= static_cast<double>(values.size());
  fmt::print(out, "mean,,{}\n", mean);
  return predictions;
}

std::vector<std::filesystem::path> cmd_export_attention(const ExportOptions& options, std::ostream& out) {
  const Checkpoint c = load_checkpoint(options.checkpoint);
  const ModelConfig& model = c.run.model;
  const MotionSequence seq = load_input(c, options.input);
  const std::vector<MotionSegment> windows =
      seq.frame_count() < model.frames ? std::vector<MotionSegment>{}
                                       : window_slice(seq, model.frames, c.run.window_offset, c.run.end_aligned);
  if (options.window >= windows.size()) {
    throw DataError(fmt::format("window {} out of range: {} has {} windows", options.window,
                                options.input.path.string(), windows.size()));
  }
  if (options.frame >= model.frames) {
    throw DataError(fmt::format("frame {} out of range: windows have {} frames", options.frame, model.frames));
  }
  check_dims(model, std::span(&windows[options.window], 1));

  const Prediction p = predict(c.state.params, model, windows[options.window].values, true);
  std::vector<AttentionRecord> selected;
  for (const AttentionRecord& r : p.attention) {
    const bool keep = r.block == AttentionBlockKind::spatial ? options.spatial && r.frame == options.frame
                                                            : options.temporal;
    if (keep) selected.push_back(r);
  }
  const std::vector<std::filesystem::path> written = export_attention(selected, options.output_dir);
  fmt::print(out, "window {} (start {}): prediction {}; wrote {} matrices to {}\n", options.window,
             windows[options.window].start, c.scaler.decode(p.value), written.size(), options.output_dir.string());
  return written;
}

std::filesystem::path cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& dir, std::ostream& out) {
  const std::filesystem::path manifest = write_synthetic(dir, generate_synthetic(spec));
  fmt::print(out, "wrote {} synthetic videos; manifest {}\n", spec.samples, manifest.string());
  return manifest;
}

std::size_t cmd_count_params(const ModelConfig& config, bool verbose, std::ostream& out) {
  config.validate();
  const std::size_t total = count_params(config);
  if (verbose) {
    const ModelParams params = init_params(config, 0);
    for_each_param(
        [&out](const std::string& name, const Tensor& t) {
          fmt::print(out, "{} {} {}\n", name, to_string(t.shape()), t.size());
        },
        params);
  }
  fmt::print(out, "{}\n", total);
  return total;
}

}  // namespace gaitformer

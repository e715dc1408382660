// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include "gaitformer/commands.hpp"
#include "gaitformer/keypoints.hpp"
#include "gaitformer/model.hpp"
#include "test_util.hpp"

namespace gaitformer {
namespace {

using testing::TempDir;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  return lines;
}

std::vector<std::vector<double>> read_matrix(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  for (const std::string& line : lines_of(read_file(path))) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

bool same_params(const ModelParams& a, const ModelParams& b) {
  bool same = true;
  for_each_param([&](const std::string&, const Tensor& x, const Tensor& y) { same = same && x == y; }, a, b);
  return same;
}

// 20 videos of 64 frames: two 32-frame windows per video, 10 patients.
SyntheticSpec small_spec(std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.samples = 20;
  spec.frames = 64;
  spec.seed = seed;
  return spec;
}

RunConfig tiny_run(const std::filesystem::path& manifest, const std::filesystem::path& out, std::size_t epochs) {
  RunConfig c;
  c.task = Task::knee_flexion;
  c.model.frames = 32;
  c.model.embed_dim = 8;
  c.model.head_hidden = 16;
  c.epochs = epochs;
  c.batch_size = 8;
  c.seed = 5;
  c.manifest = manifest;
  c.output_dir = out;
  return c;
}

class CommandsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = std::make_unique<TempDir>("gaitformer_cmd");
    std::ostringstream sink;
    manifest_ = cmd_synth(small_spec(), data_->path() / "synth", sink);
    trained_ = cmd_train(tiny_run(manifest_, data_->path() / "run", 41), sink);
  }
  static void TearDownTestSuite() { data_.reset(); }

  static std::filesystem::path root() { return data_->path(); }

  static KeypointInput input_for(const std::string& video) {
    return {manifest_.parent_path() / "keypoints" / (video + ".csv"), Side::left, 640.0, 480.0};
  }

  static inline std::unique_ptr<TempDir> data_;
  static inline std::filesystem::path manifest_;
  static inline TrainOutputs trained_;
};

TEST_F(CommandsTest, SynthIsByteIdentical) {
  std::ostringstream sink;
  const auto a = cmd_synth(small_spec(9), root() / "sa", sink);
  const auto b = cmd_synth(small_spec(9), root() / "sb", sink);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(read_file(a.parent_path() / "keypoints" / "V0007.csv"),
            read_file(b.parent_path() / "keypoints" / "V0007.csv"));
}

TEST_F(CommandsTest, TrainWritesLogSplitAndCheckpoints) {
  EXPECT_TRUE(std::filesystem::exists(trained_.best_checkpoint));
  EXPECT_TRUE(std::filesystem::exists(trained_.last_checkpoint));
  const auto log = lines_of(read_file(trained_.log));
  ASSERT_EQ(log.size(), 42u);
  EXPECT_EQ(log[0], "epoch,lr,train_loss,val_loss,val_correlation,val_mae");
  const auto split = lines_of(read_file(trained_.split));
  EXPECT_EQ(split.size(), 11u);  // header + 10 patients
  EXPECT_EQ(split[0], "patient_id,split");
}

TEST_F(CommandsTest, LogFollowsGdiSchedule) {
  const std::vector<EpochLog>& log = trained_.result.log;
  ASSERT_EQ(log.size(), 41u);
  EXPECT_NEAR(log[0].lr, 3e-4, 1e-12);
  EXPECT_NEAR(log[20].lr, 1.9e-4, 1e-12);
  EXPECT_NEAR(log[40].lr, 3e-4, 1e-12);
  const auto lines = lines_of(read_file(trained_.log));
  EXPECT_NEAR(std::stod(lines[21].substr(lines[21].find(',') + 1)), 1.9e-4, 1e-12);
}

TEST_F(CommandsTest, SameSeedGivesIdenticalLogs) {
  std::ostringstream sink;
  const auto a = cmd_train(tiny_run(manifest_, root() / "da", 3), sink);
  const auto b = cmd_train(tiny_run(manifest_, root() / "db", 3), sink);
  EXPECT_EQ(read_file(a.log), read_file(b.log));
  EXPECT_EQ(read_file(a.split), read_file(b.split));
  EXPECT_TRUE(same_params(a.result.last.params, b.result.last.params));
}

TEST_F(CommandsTest, BestCheckpointHasLowestValidationLoss) {
  double lowest = INFINITY;
  std::size_t epoch = 0;
  for (const EpochLog& row : trained_.result.log) {
    if (*row.val_loss < lowest) {
      lowest = *row.val_loss;
      epoch = row.epoch;
    }
  }
  EXPECT_EQ(trained_.result.best.epoch, epoch);
  EXPECT_EQ(load_checkpoint(trained_.best_checkpoint).state.epoch, epoch);
  EXPECT_EQ(load_checkpoint(trained_.last_checkpoint).state.epoch, 40u);
}

TEST_F(CommandsTest, CheckpointRoundTripReproducesEval) {
  const Checkpoint c = load_checkpoint(trained_.best_checkpoint);
  EXPECT_TRUE(same_params(c.state.params, trained_.result.best.params));
  EXPECT_EQ(c.scaler.mean, trained_.result.scaler.mean);
  EXPECT_EQ(c.scaler.scale, trained_.result.scaler.scale);
  EXPECT_EQ(c.run.model, tiny_run(manifest_, root(), 1).model);

  const auto copy = root() / "copy.ckpt";
  save_checkpoint(copy, c);
  EXPECT_EQ(read_file(copy), read_file(trained_.best_checkpoint));

  std::ostringstream sink;
  const EvalReport a = cmd_eval({trained_.best_checkpoint}, sink);
  const EvalReport b = cmd_eval({copy}, sink);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].prediction, b.rows[i].prediction);
}

TEST_F(CommandsTest, EvalRowsMatchSplitAndFiles) {
  const Checkpoint c = load_checkpoint(trained_.best_checkpoint);
  const DatasetSplit split = split_by_patient(
      build_segments(load_manifest(manifest_), c.run.task, c.run.segment_options()), c.run.ratios, c.run.seed);
  std::ostringstream out;
  const EvalReport report = cmd_eval({trained_.best_checkpoint, std::nullopt, SplitKind::test, root() / "eval"}, out);
  EXPECT_EQ(report.n, split.test.size());
  EXPECT_EQ(report.rows.size(), split.test.size());
  EXPECT_EQ(lines_of(read_file(root() / "eval" / "eval_test.csv")).size(), split.test.size() + 1);
  const auto summary = lines_of(read_file(root() / "eval" / "eval_test_summary.csv"));
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[0], "level,task,correlation,mae,n");
  EXPECT_EQ(summary[1], "segment," + report.summary_line());

  const EvalReport val = cmd_eval({trained_.best_checkpoint, std::nullopt, SplitKind::val}, out);
  EXPECT_EQ(val.n, split.val.size());
}

TEST_F(CommandsTest, EvalRejectsDimensionMismatch) {
  // A speed manifest needs 8 joints; the checkpoint was trained on 4.
  Checkpoint c = load_checkpoint(trained_.best_checkpoint);
  c.run.task = Task::speed;
  save_checkpoint(root() / "wrong.ckpt", c);
  std::ostringstream sink;
  EXPECT_THROW(cmd_eval({root() / "wrong.ckpt"}, sink), ShapeError);
}

TEST_F(CommandsTest, PredictMatchesEvalForTheSameWindows) {
  std::ostringstream sink;
  const EvalReport report = cmd_eval({trained_.best_checkpoint}, sink);
  const std::string video = report.rows.front().video_id;
  std::ostringstream out;
  const auto windows = cmd_predict(trained_.best_checkpoint, input_for(video), out);
  ASSERT_EQ(windows.size(), 2u);
  EXPECT_EQ(windows[0].start, 0u);
  EXPECT_EQ(windows[1].start, 31u);
  for (const EvalRow& row : report.rows) {
    if (row.video_id != video) continue;
    const std::size_t start = std::stoul(row.segment_id.substr(row.segment_id.find('@') + 1));
    EXPECT_EQ(row.prediction, windows[start == 0 ? 0 : 1].value);
  }
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "window,start,prediction");
  EXPECT_EQ(lines[3].rfind("mean,,", 0), 0u);
}

TEST_F(CommandsTest, PredictWindowCountFollowsLength) {
  // Untrained checkpoint at the full window length.
  RunConfig run;
  run.task = Task::knee_flexion;
  run.finalize();
  const ModelParams params = init_params(run.model, 1);
  save_checkpoint(root() / "full.ckpt", {run, {params, AdamState::for_params(params), 0, ""}, {}});

  for (const auto& [frames, expected] : std::vector<std::pair<std::size_t, std::vector<std::size_t>>>{
           {124, {0}}, {200, {0, 31, 62}}}) {
    SyntheticSpec spec = small_spec();
    spec.samples = 2;
    spec.frames = frames;
    std::ostringstream sink;
    const auto manifest = cmd_synth(spec, root() / ("len" + std::to_string(frames)), sink);
    const auto windows = cmd_predict(
        root() / "full.ckpt", {manifest.parent_path() / "keypoints" / "V0000.csv", Side::left, 640.0, 480.0}, sink);
    ASSERT_EQ(windows.size(), expected.size()) << frames;
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(windows[i].start, expected[i]);
  }
}

TEST_F(CommandsTest, PredictRejectsShortInput) {
  SyntheticSpec spec = small_spec();
  spec.samples = 2;
  spec.frames = 20;
  std::ostringstream sink;
  const auto manifest = cmd_synth(spec, root() / "short", sink);
  try {
    cmd_predict(trained_.best_checkpoint, {manifest.parent_path() / "keypoints" / "V0000.csv", Side::left, 640, 480},
                sink);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("needs at least 32"), std::string::npos) << e.what();
  }
}

TEST_F(CommandsTest, ExportWritesRowStochasticMatrices) {
  ExportOptions options;
  options.checkpoint = trained_.best_checkpoint;
  options.input = input_for("V0000");
  options.window = 1;
  options.frame = 7;
  options.output_dir = root() / "attn";
  std::ostringstream out;
  const auto written = cmd_export_attention(options, out);
  ASSERT_EQ(written.size(), 4u);
  std::size_t spatial = 0;
  std::size_t temporal = 0;
  for (const auto& path : written) {
    const auto m = read_matrix(path);
    const std::size_t n = path.filename().string().starts_with("spatial") ? 4 : 32;
    (n == 4 ? spatial : temporal) += 1;
    ASSERT_EQ(m.size(), n) << path;
    for (const auto& row : m) {
      ASSERT_EQ(row.size(), n);
      double sum = 0.0;
      for (double v : row) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(path).replace_extension(".svg")));
  }
  EXPECT_EQ(spatial, 2u);
  EXPECT_EQ(temporal, 2u);
  EXPECT_TRUE(std::filesystem::exists(options.output_dir / "spatial_l0_h1_f7.csv"));

  options.spatial = false;
  EXPECT_EQ(cmd_export_attention(options, out).size(), 2u);
  options.window = 2;
  EXPECT_THROW(cmd_export_attention(options, out), DataError);
  options.window = 0;
  options.frame = 32;
  EXPECT_THROW(cmd_export_attention(options, out), DataError);
}

TEST_F(CommandsTest, ResumeContinuesExactly) {
  std::ostringstream sink;
  const auto straight = cmd_train(tiny_run(manifest_, root() / "straight", 5), sink);
  cmd_train(tiny_run(manifest_, root() / "resumed", 2), sink);
  const auto resumed =
      cmd_train(tiny_run(manifest_, root() / "resumed", 5), sink, root() / "resumed" / "last.ckpt");
  EXPECT_TRUE(same_params(straight.result.last.params, resumed.result.last.params));
  EXPECT_EQ(straight.result.last.adam.step, resumed.result.last.adam.step);
  EXPECT_EQ(read_file(straight.log), read_file(resumed.log));
  EXPECT_TRUE(same_params(straight.result.last.adam.m, resumed.result.last.adam.m));
  EXPECT_TRUE(same_params(straight.result.last.adam.v, resumed.result.last.adam.v));
  EXPECT_EQ(straight.result.last.rng_state, resumed.result.last.rng_state);

  RunConfig other = tiny_run(manifest_, root() / "other", 5);
  other.model.embed_dim = 4;
  EXPECT_THROW(cmd_train(other, sink, root() / "resumed" / "last.ckpt"), ConfigError);
}

TEST_F(CommandsTest, TrainErrors) {
  std::ostringstream sink;
  EXPECT_THROW(cmd_train(tiny_run(root() / "missing.csv", root() / "e1", 1), sink), DataError);
  // The synthetic manifest has no GDI targets.
  RunConfig gdi = tiny_run(manifest_, root() / "e2", 1);
  gdi.task = Task::gdi;
  EXPECT_THROW(cmd_train(gdi, sink), DataError);

  // Targets near the overflow limit make the squared error infinite.
  std::vector<ManifestEntry> entries = load_manifest(manifest_);
  for (ManifestEntry& e : entries) e.knee_flexion = 1e200;
  write_manifest(manifest_.parent_path() / "huge.csv", entries);
  RunConfig huge = tiny_run(manifest_.parent_path() / "huge.csv", root() / "e3", 3);
  huge.standardize_targets = false;
  try {
    cmd_train(huge, sink);
    FAIL() << "expected an error";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
  }
}

TEST_F(CommandsTest, CountParams) {
  std::ostringstream out;
  EXPECT_EQ(cmd_count_params(ModelConfig{}, false, out), 37637u);
  EXPECT_EQ(out.str(), "37637\n");
  std::ostringstream verbose;
  cmd_count_params(ModelConfig{}, true, verbose);
  const auto lines = lines_of(verbose.str());
  EXPECT_GT(lines.size(), 10u);
  EXPECT_EQ(lines.back(), "37637");
}

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string command =
      std::string(GAITFORMER_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(command.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

TEST_F(CommandsTest, CliExitCodesAndDiagnostics) {
  const auto dir = root();
  const CliResult ok = run_cli("count-params --task speed", dir);
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "128453\n");

  for (const std::string& args :
       {std::string("train -o x"), std::string("train -m /nonexistent/manifest.csv -o ") + (dir / "c1").string(),
        std::string("count-params --task walking"), std::string("eval --checkpoint ") + manifest_.string(),
        std::string("predict --checkpoint ") + trained_.best_checkpoint.string() + " -k /nonexistent.csv",
        std::string("frobnicate")}) {
    const CliResult r = run_cli(args, dir);
    EXPECT_NE(r.code, 0) << args;
    EXPECT_EQ(lines_of(r.err).size(), 1u) << args << ": " << r.err;
    EXPECT_EQ(r.err.rfind("gaitformer: error: ", 0), 0u) << r.err;
  }
}

TEST_F(CommandsTest, CliPredictPrintsWindows) {
  const CliResult r = run_cli("predict --checkpoint " + trained_.best_checkpoint.string() + " -k " +
                                  input_for("V0003").path.string() + " --width 640 --height 480 --side L",
                              root());
  ASSERT_EQ(r.code, 0) << r.err;
  std::ostringstream expected;
  cmd_predict(trained_.best_checkpoint, input_for("V0003"), expected);
  EXPECT_EQ(r.out, expected.str());
}

}  // namespace
}  // namespace gaitformer

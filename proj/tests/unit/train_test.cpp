#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "tcnlab/train/trainer.hpp"
#include "test_util.hpp"

namespace tcnlab::train {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_adding(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.name = "small";
  cfg.task.kind = tasks::TaskKind::kAdding;
  cfg.task.seq_len = 12;
  cfg.task.train_size = 96;
  cfg.task.test_size = 40;
  cfg.model.kernel_size = 2;
  cfg.model.levels = 2;
  cfg.model.hidden = 4;
  cfg.model.dropout = 0.1;
  cfg.train.batch_size = 16;
  cfg.train.epochs = 3;
  cfg.train.eval_every = 4;
  cfg.train.eval_batch_size = 20;
  cfg.train.grad_clip = 1.0;
  cfg.train.out_dir = out_dir;
  return cfg;
}

TEST(Config, IniRoundTrip) {
  auto cfg = preset("copy-t1000-tcn");
  const auto back = parse_ini(to_ini(cfg));
  EXPECT_EQ(to_ini(back), to_ini(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
}

TEST(Config, CopyT1000PresetCarriesSupplementSettings) {
  const auto cfg = preset("copy-t1000-tcn");
  EXPECT_EQ(cfg.model.kernel_size, 8u);
  EXPECT_EQ(cfg.model.levels, 8u);
  EXPECT_EQ(cfg.model.hidden, 10u);
  EXPECT_EQ(cfg.model.dropout, 0.05);
  EXPECT_EQ(cfg.train.grad_clip, 1.0);
  EXPECT_EQ(cfg.optim.kind, OptimizerKind::kRmsprop);
  EXPECT_EQ(cfg.optim.lr, 5e-4);
}

TEST(Config, OverridesAndErrors) {
  auto cfg = preset("adding-t200-tcn");
  apply_override(cfg, "model.hidden=5");
  apply_override(cfg, "optim.lr=0.125");
  EXPECT_EQ(cfg.model.hidden, 5u);
  EXPECT_EQ(cfg.optim.lr, 0.125);
  EXPECT_THROW(apply_override(cfg, "model.nonsense=1"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "model.hidden=abc"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "hidden=3"), ConfigError);
  EXPECT_THROW(parse_ini("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(preset("no-such-preset"), ConfigError);
}

TEST(Config, HashIgnoresOutputDirectoryOnly) {
  auto a = preset("adding-t200-tcn"), b = a;
  b.train.out_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.train.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(Config, EveryPresetParsesAndRoundTrips) {
  for (const auto& name : preset_names()) {
    const auto cfg = preset(name);
    EXPECT_EQ(to_ini(parse_ini(to_ini(cfg))), to_ini(cfg)) << name;
  }
}

TEST(Metrics, RowRoundTrip) {
  MetricsRow r;
  r.step = 12;
  r.epoch = 1;
  r.split = "test";
  r.loss = 0.1234567890123;
  r.metric = 0.5;
  r.metric_kind = tasks::MetricKind::kPayloadAccuracy;
  r.fraction_of_baseline = 0.25;
  r.lr = 0.002;
  const auto back = parse_row(format_row(r));
  EXPECT_EQ(format_row(back), format_row(r));
  EXPECT_EQ(back.loss, r.loss);
  EXPECT_THROW(parse_row("1,2,test"), FormatError);
}

TEST(Metrics, PerfectAndAllZeroCopyPredictors) {
  const auto batch = tasks::gen_copy_memory(8, 10, 3);
  const std::size_t L = batch.length();
  Tensor<float> perfect({8, 10, L}, -50.0f), zeros({8, 10, L}, -50.0f);
  for (std::size_t n = 0; n < 8; ++n)
    for (std::size_t t = 0; t < L; ++t) {
      perfect.data()[(n * 10 + batch.labels[n * L + t]) * L + t] = 50.0f;
      zeros.data()[(n * 10 + 0) * L + t] = 50.0f;
    }
  MetricAccumulator good(tasks::MetricKind::kPayloadAccuracy), bad(tasks::MetricKind::kPayloadAccuracy);
  good.add(batch, perfect, 0.0);
  bad.add(batch, zeros, 1.0);
  EXPECT_EQ(good.metric(), 1.0);
  EXPECT_EQ(bad.metric(), 0.0);
}

TEST(Metrics, MemorylessCopyPredictorScoresBaseline) {
  const std::size_t T = 30;
  const auto batch = tasks::gen_copy_memory(16, T, 4);
  const std::size_t L = batch.length();
  Tensor<double> logits({16, 10, L}, -1e30);
  for (std::size_t n = 0; n < 16; ++n)
    for (std::size_t t = 0; t < L; ++t) {
      if (t + 10 < L)
        logits.data()[(n * 10) * L + t] = 0.0;
      else
        for (std::size_t c = 1; c <= 8; ++c) logits.data()[(n * 10 + c) * L + t] = 0.0;
    }
  Tape<double> tape(Tape<double>::Mode::kInference);
  EXPECT_NEAR(task_loss(tape, logits, batch).item(), *tasks::baseline_loss(tasks::TaskKind::kCopy, T), 1e-12);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  test::TempDir dir;
  const auto cfg = small_adding(dir.file("run"));
  train(cfg);
  const std::string path = (fs::path(cfg.train.out_dir) / kCheckpointFile).string();
  const std::string bytes = test::read_file(path);
  EXPECT_EQ(serialize_checkpoint(parse_checkpoint(bytes)), bytes);

  Rng rng(0);
  auto model = nn::make_model<float>(cfg.model, model_io(cfg), rng);
  Optimizer<float> opt(cfg.optim, model->params());
  const auto state = checkpoint_load(path, model->params(), opt, hash_hex(config_hash(cfg)));
  checkpoint_save(dir.file("again.tcnck"), model->params(), opt, hash_hex(config_hash(cfg)), state);
  EXPECT_EQ(test::read_file(dir.file("again.tcnck")), bytes);
}

TEST(Checkpoint, RejectsTamperedShapeAndHash) {
  test::TempDir dir;
  const auto cfg = small_adding(dir.file("run"));
  train(cfg);
  const std::string path = (fs::path(cfg.train.out_dir) / kCheckpointFile).string();
  const std::string hash = hash_hex(config_hash(cfg));
  Rng rng(0);
  auto model = nn::make_model<float>(cfg.model, model_io(cfg), rng);
  Optimizer<float> opt(cfg.optim, model->params());
  const Tensor<float> first = model->params()[0].tensor.clone();

  std::string bytes = test::read_file(path);
  const std::string from = "tcn.block0.conv1.v f32 4x2x2";
  const auto at = bytes.find(from);
  ASSERT_NE(at, std::string::npos);
  bytes.replace(at, from.size(), "tcn.block0.conv1.v f32 4x4x1");
  try {
    restore_checkpoint(parse_checkpoint(bytes), model->params(), opt, hash);
    FAIL() << "tampered shape accepted";
  } catch (const CheckpointMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("tcn.block0.conv1.v"), std::string::npos);
  }
  EXPECT_THROW(checkpoint_load(path, model->params(), opt, "0000000000000000"), CheckpointMismatch);
  EXPECT_EQ(model->params()[0].tensor.data()[0], first.data()[0]);

  std::string truncated = test::read_file(path);
  truncated.pop_back();
  EXPECT_THROW(parse_checkpoint(truncated), FormatError);
}

TEST(Trainer, WritesAllArtifactsWithFixedHeader) {
  test::TempDir dir;
  const auto cfg = small_adding(dir.file("run"));
  const auto result = train(cfg);
  EXPECT_TRUE(result.completed);
  EXPECT_EQ(result.steps, 18u);
  for (const char* f : {kConfigFile, kMetricsFile, kCheckpointFile}) EXPECT_TRUE(fs::exists(dir.path() / "run" / f));
  const std::string csv = test::read_file(dir.file("run/metrics.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsHeader);
  EXPECT_EQ(load_config(dir.file("run/config.ini")).model.hidden, 4u);
}

TEST(Trainer, RerunIsBitIdentical) {
  test::TempDir dir;
  auto a = small_adding(dir.file("a")), b = small_adding(dir.file("b"));
  train(a);
  train(b);
  EXPECT_EQ(test::read_file(dir.file("a/metrics.csv")), test::read_file(dir.file("b/metrics.csv")));
  EXPECT_EQ(test::read_file(dir.file("a/checkpoint.tcnck")), test::read_file(dir.file("b/checkpoint.tcnck")));
}

TEST(Trainer, ResumeContinuesStepCounterAndMatchesUninterrupted) {
  test::TempDir dir;
  const auto full = small_adding(dir.file("full"));
  train(full);
  auto split = small_adding(dir.file("split"));
  RunOptions stop;
  stop.stop_at_step = 8;
  const auto first = train(split, stop);
  EXPECT_FALSE(first.completed);
  EXPECT_EQ(first.steps, 8u);
  RunOptions resume;
  resume.resume = true;
  const auto second = train(split, resume);
  EXPECT_TRUE(second.completed);
  ASSERT_FALSE(second.rows.empty());
  EXPECT_EQ(second.rows.front().step, 12u);
  EXPECT_EQ(test::read_file(dir.file("split/metrics.csv")), test::read_file(dir.file("full/metrics.csv")));
  EXPECT_EQ(test::read_file(dir.file("split/checkpoint.tcnck")), test::read_file(dir.file("full/checkpoint.tcnck")));
}

TEST(Trainer, ResumeRefusesChangedConfig) {
  test::TempDir dir;
  auto cfg = small_adding(dir.file("run"));
  RunOptions stop;
  stop.stop_at_step = 4;
  train(cfg, stop);
  cfg.optim.lr = 0.5;
  RunOptions resume;
  resume.resume = true;
  EXPECT_THROW(train(cfg, resume), CheckpointMismatch);
}

TEST(Trainer, ZeroLearningRateKeepsTestLossConstant) {
  test::TempDir dir;
  auto cfg = small_adding(dir.file("run"));
  cfg.optim.lr = 0.0;
  const auto result = train(cfg);
  std::vector<double> test_losses;
  for (const auto& r : result.rows)
    if (r.split == "test") test_losses.push_back(r.loss);
  ASSERT_GE(test_losses.size(), 2u);
  for (double l : test_losses) EXPECT_NEAR(l, test_losses.front(), 1e-6 * std::abs(test_losses.front()));
}

TEST(Evaluate, ReadsParamsOnlyAndIsRepeatable) {
  auto cfg = small_adding("");
  auto data = load_task_data(cfg);
  Rng rng(1);
  auto model = nn::make_model<float>(cfg.model, data->io(), rng);
  std::vector<std::vector<float>> before;
  for (const auto& p : model->params()) before.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  const auto batches = data->eval_batches(Split::kTest, 20);
  const auto a = evaluate(*model, batches, tasks::MetricKind::kMse, data->baseline(), "test");
  const auto b = evaluate(*model, batches, tasks::MetricKind::kMse, data->baseline(), "test");
  EXPECT_EQ(format_row(a), format_row(b));
  for (std::size_t i = 0; i < model->params().size(); ++i) {
    const auto& t = model->params()[i].tensor;
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), before[i].begin()));
    EXPECT_FALSE(t.has_grad());
  }
}

TEST(Trainer, NonFiniteLossRaisesNumericalError) {
  test::TempDir dir;
  auto cfg = small_adding(dir.file("run"));
  cfg.optim.kind = OptimizerKind::kSgd;
  cfg.optim.lr = 1e30;
  cfg.train.grad_clip = 0.0;
  cfg.model.dropout = 0.0;
  EXPECT_THROW(train(cfg), NumericalError);
  EXPECT_TRUE(fs::exists(dir.path() / "run" / kMetricsFile));
}

}  // namespace
}  // namespace tcnlab::train

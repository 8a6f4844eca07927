#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "tcnlab/cli.hpp"
#include "tcnlab/train/trainer.hpp"
#include "test_util.hpp"

namespace tcnlab::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tiny_config(const test::TempDir& dir) {
  train::ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.task.seq_len = 10;
  cfg.task.train_size = 48;
  cfg.task.test_size = 16;
  cfg.model.kernel_size = 2;
  cfg.model.levels = 2;
  cfg.model.hidden = 3;
  cfg.train.batch_size = 16;
  cfg.train.epochs = 2;
  cfg.train.eval_every = 3;
  const std::string path = dir.file("tiny.ini");
  test::write_file(path, train::to_ini(cfg));
  return path;
}

TEST(CliRf, ReportsFieldAndMinimumDepth) {
  auto r = call({"rf", "--k", "8", "--n", "8"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("receptive_field 3571"), std::string::npos);
  r = call({"rf", "--k", "1", "--n", "5"});
  EXPECT_NE(r.out.find("receptive_field 1\n"), std::string::npos);
  r = call({"rf", "--k", "3", "--target", "784"});
  EXPECT_NE(r.out.find("min_levels 8 (receptive_field 1021)"), std::string::npos);
  EXPECT_EQ(call({"rf", "--k", "3"}).code, kUsage);
}

TEST(CliRun, UnknownOverrideExitsTwoAndWritesNothing) {
  test::TempDir dir;
  const auto out = dir.file("run");
  const auto r = call({"run", "--preset", "adding-t50-tcn-tiny", "--out", out, "--override", "model.bogus=1"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST(CliRun, UsageErrors) {
  EXPECT_EQ(call({}).code, kUsage);
  EXPECT_EQ(call({"run"}).code, kUsage);
  EXPECT_EQ(call({"run", "--preset", "nope", "--out", "/tmp/x"}).code, kUsage);
  EXPECT_EQ(call({"frobnicate"}).code, kUsage);
  EXPECT_EQ(call({"verify", "--suite", "nope"}).code, kUsage);
}

TEST(CliRun, MatchesLibraryOutputs) {
  test::TempDir dir;
  const auto cfg_path = tiny_config(dir);
  const auto r = call({"run", "--config", cfg_path, "--out", dir.file("cli"), "--seed", "7", "--quiet"});
  ASSERT_EQ(r.code, kOk) << r.err;
  auto cfg = train::load_config(cfg_path);
  cfg.train.seed = 7;
  cfg.train.out_dir = dir.file("lib");
  train::train(cfg);
  for (const char* f : {train::kMetricsFile, train::kCheckpointFile})
    EXPECT_EQ(test::read_file(dir.file(std::string("cli/") + f)), test::read_file(dir.file(std::string("lib/") + f)))
        << f;
}

TEST(CliRun, StopAndResume) {
  test::TempDir dir;
  const auto cfg_path = tiny_config(dir);
  ASSERT_EQ(call({"run", "--config", cfg_path, "--out", dir.file("full"), "--quiet"}).code, kOk);
  ASSERT_EQ(call({"run", "--config", cfg_path, "--out", dir.file("part"), "--quiet", "--stop-at", "3"}).code, kOk);
  ASSERT_EQ(call({"run", "--config", cfg_path, "--out", dir.file("part"), "--quiet", "--resume"}).code, kOk);
  EXPECT_EQ(test::read_file(dir.file("part/metrics.csv")), test::read_file(dir.file("full/metrics.csv")));
}

TEST(CliCompare, TableAndMissingRun) {
  test::TempDir dir;
  const auto cfg_path = tiny_config(dir);
  ASSERT_EQ(call({"run", "--config", cfg_path, "--out", dir.file("a"), "--quiet"}).code, kOk);
  ASSERT_EQ(call({"run", "--config", cfg_path, "--out", dir.file("b"), "--quiet", "--seed", "2"}).code, kOk);
  auto r = call({"compare", "--runs", dir.file("a"), dir.file("b"), "--out", dir.file("t.csv")});
  EXPECT_EQ(r.code, kOk);
  const std::string table = test::read_file(dir.file("t.csv"));
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  const std::size_t params = train::count_params(train::load_config(cfg_path));
  EXPECT_NE(table.find(",tcn," + std::to_string(params) + ","), std::string::npos);

  fs::remove(dir.path() / "b" / train::kMetricsFile);
  r = call({"compare", "--runs", dir.file("a"), dir.file("b"), "--out", dir.file("t.csv")});
  EXPECT_EQ(r.code, kIncomplete);
  EXPECT_NE(test::read_file(dir.file("t.csv")).find("FAILED"), std::string::npos);
}

TEST(CliPresets, ListsEveryPreset) {
  const auto r = call({"presets"});
  EXPECT_EQ(r.code, kOk);
  for (const auto& name : train::preset_names()) EXPECT_NE(r.out.find(name + ' '), std::string::npos);
}

}  // namespace
}  // namespace tcnlab::cli

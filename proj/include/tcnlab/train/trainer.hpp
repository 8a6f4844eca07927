#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcnlab/train/checkpoint.hpp"
#include "tcnlab/train/config.hpp"
#include "tcnlab/train/data.hpp"
#include "tcnlab/train/metrics.hpp"

namespace tcnlab::train {

inline constexpr const char* kConfigFile = "config.ini";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.tcnck";

struct RunOptions {
  bool resume = false;            // continue from out_dir/checkpoint.tcnck
  // Stop (and checkpoint) after this many steps; 0: run to the end. A resumed
  // run reproduces the uninterrupted metrics exactly when this is a multiple
  // of the evaluation interval.
  std::uint64_t stop_at_step = 0;
  std::ostream* log = nullptr;    // progress lines, one per evaluation
};

struct RunResult {
  std::vector<MetricsRow> rows;  // rows written by this invocation
  std::optional<MetricsRow> final_test;
  std::optional<MetricsRow> final_train;
  std::size_t param_count = 0;
  std::uint64_t steps = 0;
  bool completed = false;
};

/// Loss and task metric over `batches` with dropout off, using an inference
/// tape. Parameters are only read. The row carries split and baseline
/// fraction; step, epoch and lr are left for the caller.
MetricsRow evaluate(const nn::SequenceModel<float>& model, const std::vector<tasks::TaskBatch>& batches,
                    tasks::MetricKind metric, std::optional<double> baseline, const std::string& split);

/// Runs the configured experiment, writing config.ini, metrics.csv and
/// checkpoint.tcnck into cfg.train.out_dir. A non-finite loss or gradient
/// throws NumericalError after the metrics written so far are flushed.
RunResult train(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Resolved config text as written to config.ini (metadata comments first).
std::string resolved_config_text(const ExperimentConfig& cfg, std::size_t param_count);

/// Number of trainable parameters the config's model would have.
std::size_t count_params(const ExperimentConfig& cfg);

}  // namespace tcnlab::train

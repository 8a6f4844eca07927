#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcnlab/nn/model.hpp"
#include "tcnlab/optim.hpp"
#include "tcnlab/tasks/tasks.hpp"

namespace tcnlab::train {

struct TaskConfig {
  tasks::TaskKind kind = tasks::TaskKind::kAdding;
  std::size_t seq_len = 200;     // adding / copy
  std::size_t train_size = 20000;  // synthetic: generated samples; mnist: cap (0 = all)
  std::size_t test_size = 1000;
  std::uint64_t perm_seed = 0;   // pmnist
  std::string data_dir;          // mnist IDX directory
  std::string train_path, valid_path, test_path;  // piano rolls
  std::string corpus_path;       // char corpus
  double train_frac = 0.9;
  double valid_frac = 0.05;
  std::size_t unroll = 100;      // char windows
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  std::size_t max_steps = 0;     // 0: run all epochs
  std::size_t eval_every = 0;    // steps between evaluations; 0: once per epoch
  std::size_t eval_batch_size = 256;
  double grad_clip = 0.0;        // 0: no clipping
  std::size_t plateau_patience = 0;  // 0: constant lr
  double plateau_factor = 0.5;
  std::uint64_t seed = 1;
  bool record_wall_ms = false;
  std::string out_dir;           // not part of the config hash
};

struct ExperimentConfig {
  std::string name = "custom";
  TaskConfig task;
  nn::ModelSpec model;
  OptimizerConfig optim;
  TrainConfig train;
};

/// Canonical INI text: every key explicit, fixed order.
std::string to_ini(const ExperimentConfig& cfg);

/// Parses INI text on top of `base`. Unknown sections or keys throw ConfigError.
ExperimentConfig parse_ini(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

/// Applies "section.key=value". Throws ConfigError on an unknown key or bad value.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Every settable key as "section.key", in canonical order.
std::vector<std::string> config_keys();

/// FNV-1a 64 over the canonical text with the output directory removed.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

std::vector<std::string> preset_names();
bool has_preset(const std::string& name);
ExperimentConfig preset(const std::string& name);

/// How the task's data meets the model.
nn::ModelIo model_io(const ExperimentConfig& cfg, std::size_t vocab_size = 0);

}  // namespace tcnlab::train

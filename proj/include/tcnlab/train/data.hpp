#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcnlab/train/config.hpp"

namespace tcnlab::train {

enum class Split { kTrain, kValid, kTest };
std::string to_string(Split split);

/// Materialized data for one experiment. Training examples are addressed by
/// index so the loop can shuffle them; evaluation splits come pre-batched.
class TaskData {
 public:
  virtual ~TaskData() = default;

  virtual std::size_t train_examples() const = 0;
  virtual tasks::TaskBatch train_batch(std::span<const std::size_t> indices) const = 0;
  /// Examples per training step (music sequences are one example per step).
  virtual std::size_t batch_size_for(std::size_t configured) const { return configured; }
  virtual bool has_split(Split split) const = 0;
  virtual std::vector<tasks::TaskBatch> eval_batches(Split split, std::size_t batch_size) const = 0;

  tasks::TaskKind kind() const { return kind_; }
  const nn::ModelIo& io() const { return io_; }
  std::optional<double> baseline() const { return baseline_; }

 protected:
  tasks::TaskKind kind_ = tasks::TaskKind::kAdding;
  nn::ModelIo io_;
  std::optional<double> baseline_;
};

/// Builds the data for `cfg`. Synthetic sets are generated from the data
/// stream of the master seed; file-backed tasks are read from disk.
std::unique_ptr<TaskData> load_task_data(const ExperimentConfig& cfg);

/// Rows `indices` of a batch whose samples are laid out along dimension 0.
tasks::TaskBatch gather(const tasks::TaskBatch& all, std::span<const std::size_t> indices);

/// Resolves a data path: as given if it exists, else relative to the source tree.
std::string resolve_data_path(const std::string& path);

}  // namespace tcnlab::train

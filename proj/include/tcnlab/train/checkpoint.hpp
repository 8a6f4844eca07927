#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcnlab/optim.hpp"

namespace tcnlab::train {

/// Loop position and schedule state needed to resume a run.
struct TrainerState {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double lr = 0;
  bool sched_has_best = false;
  double sched_best = 0;
  std::uint64_t sched_bad = 0;
  std::uint64_t sched_reductions = 0;
};

struct CheckpointEntry {
  std::string kind;  // "param" or "state"
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// Self-describing container: a text header (config hash, loop state,
/// name/shape/dtype table) terminated by "end\n", then the little-endian
/// float32 buffers in table order.
struct Checkpoint {
  std::string config_hash;
  TrainerState state;
  std::string optimizer;  // kind name
  std::uint64_t optimizer_steps = 0;
  std::vector<CheckpointEntry> entries;

  std::size_t param_count() const;
};

std::string serialize_checkpoint(const Checkpoint& ck);
Checkpoint parse_checkpoint(const std::string& bytes);
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

/// Snapshot of parameters and optimizer buffers.
Checkpoint make_checkpoint(const nn::ParamStore<float>& params, const Optimizer<float>& opt,
                           const std::string& config_hash, const TrainerState& state);

/// Copies a checkpoint into live parameters and optimizer state. Refuses with
/// CheckpointMismatch listing every difference when the hash, names or
/// shapes disagree; nothing is modified in that case.
TrainerState restore_checkpoint(const Checkpoint& ck, nn::ParamStore<float>& params, Optimizer<float>& opt,
                                const std::string& expected_hash);

void checkpoint_save(const std::string& path, const nn::ParamStore<float>& params, const Optimizer<float>& opt,
                     const std::string& config_hash, const TrainerState& state);
TrainerState checkpoint_load(const std::string& path, nn::ParamStore<float>& params, Optimizer<float>& opt,
                             const std::string& expected_hash);

}  // namespace tcnlab::train

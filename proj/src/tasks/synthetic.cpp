#include <cmath>

#include "tcnlab/tasks/tasks.hpp"

namespace tcnlab::tasks {

TaskKind parse_task_kind(const std::string& s) {
  if (s == "adding") return TaskKind::kAdding;
  if (s == "copy") return TaskKind::kCopy;
  if (s == "seq_mnist") return TaskKind::kSeqMnist;
  if (s == "pmnist") return TaskKind::kPermutedMnist;
  if (s == "music") return TaskKind::kMusic;
  if (s == "char") return TaskKind::kChar;
  throw ConfigError("unknown task '" + s + "' (expected adding, copy, seq_mnist, pmnist, music or char)");
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kAdding: return "adding";
    case TaskKind::kCopy: return "copy";
    case TaskKind::kSeqMnist: return "seq_mnist";
    case TaskKind::kPermutedMnist: return "pmnist";
    case TaskKind::kMusic: return "music";
    case TaskKind::kChar: return "char";
  }
  return "?";
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kMse: return "mse";
    case MetricKind::kAccuracy: return "accuracy";
    case MetricKind::kPayloadAccuracy: return "payload_accuracy";
    case MetricKind::kNll: return "nll";
    case MetricKind::kBpc: return "bpc";
  }
  return "?";
}

MetricKind metric_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::kAdding: return MetricKind::kMse;
    case TaskKind::kCopy: return MetricKind::kPayloadAccuracy;
    case TaskKind::kSeqMnist:
    case TaskKind::kPermutedMnist: return MetricKind::kAccuracy;
    case TaskKind::kMusic: return MetricKind::kNll;
    case TaskKind::kChar: return MetricKind::kBpc;
  }
  return MetricKind::kMse;
}

LossKind loss_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::kAdding: return LossKind::kMseLastStep;
    case TaskKind::kCopy: return LossKind::kCePerStep;
    case TaskKind::kSeqMnist:
    case TaskKind::kPermutedMnist: return LossKind::kCeLastStep;
    case TaskKind::kMusic: return LossKind::kBernoulliPerStep;
    case TaskKind::kChar: return LossKind::kCePerToken;
  }
  return LossKind::kMseLastStep;
}

TaskBatch gen_adding(std::size_t n_samples, std::size_t seq_len, std::uint64_t seed) {
  if (seq_len < 2) throw DomainError("adding problem needs T >= 2, got " + std::to_string(seq_len));
  Rng rng(seed);
  TaskBatch batch;
  batch.loss_kind = LossKind::kMseLastStep;
  batch.input.batch = n_samples;
  batch.input.length = seq_len;
  batch.input.values = Tensor<float>({n_samples, 2, seq_len});
  batch.targets = Tensor<float>({n_samples, 1});
  float* x = batch.input.values.ptr();
  for (std::size_t n = 0; n < n_samples; ++n) {
    float* values = x + n * 2 * seq_len;
    float* marks = values + seq_len;
    for (std::size_t t = 0; t < seq_len; ++t) values[t] = static_cast<float>(uniform01(rng));
    std::uniform_int_distribution<std::size_t> first_pos(0, seq_len - 1);
    std::uniform_int_distribution<std::size_t> second_pos(0, seq_len - 2);
    const std::size_t a = first_pos(rng);
    std::size_t b = second_pos(rng);
    if (b >= a) ++b;
    marks[a] = 1.0f;
    marks[b] = 1.0f;
    batch.targets.ptr()[n] = values[a] + values[b];
  }
  return batch;
}

TaskBatch gen_copy_memory(std::size_t n_samples, std::size_t seq_len, std::uint64_t seed) {
  if (seq_len < 1) throw DomainError("copy memory needs T >= 1");
  Rng rng(seed);
  const std::size_t total = seq_len + 2 * kCopyPayload;
  TaskBatch batch;
  batch.loss_kind = LossKind::kCePerStep;
  batch.input.batch = n_samples;
  batch.input.length = total;
  batch.input.tokens.assign(n_samples * total, 0);
  batch.labels.assign(n_samples * total, 0);
  batch.mask.assign(n_samples * total, 0.0f);
  std::uniform_int_distribution<int> digit(1, 8);
  for (std::size_t n = 0; n < n_samples; ++n) {
    std::int32_t* in = batch.input.tokens.data() + n * total;
    std::int32_t* out = batch.labels.data() + n * total;
    float* mask = batch.mask.data() + n * total;
    for (std::size_t i = 0; i < kCopyPayload; ++i) in[i] = digit(rng);
    for (std::size_t i = total - kCopyPayload - 1; i < total; ++i) in[i] = 9;
    for (std::size_t i = 0; i < kCopyPayload; ++i) {
      out[total - kCopyPayload + i] = in[i];
      mask[total - kCopyPayload + i] = 1.0f;
    }
  }
  return batch;
}

std::optional<double> baseline_loss(TaskKind task, std::size_t seq_len) {
  switch (task) {
    case TaskKind::kAdding: return 1.0 / 6.0;
    case TaskKind::kCopy:
      return static_cast<double>(kCopyPayload) * std::log(8.0) /
             static_cast<double>(seq_len + 2 * kCopyPayload);
    default: return std::nullopt;
  }
}

}  // namespace tcnlab::tasks

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcnlab/tasks/tasks.hpp"

namespace tcnlab::train {

inline constexpr const char* kMetricsHeader =
    "step,epoch,split,loss,metric,metric_kind,fraction_of_baseline,lr,wall_ms";

struct MetricsRow {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  std::string split;
  double loss = 0;
  double metric = 0;
  tasks::MetricKind metric_kind = tasks::MetricKind::kMse;
  std::optional<double> fraction_of_baseline;
  double lr = 0;
  std::uint64_t wall_ms = 0;
};

std::string format_row(const MetricsRow& row);
/// Inverse of format_row. Throws FormatError on a malformed line.
MetricsRow parse_row(const std::string& line);
std::vector<MetricsRow> read_metrics(const std::string& path);

/// Training loss for a batch given model logits.
template <typename S>
Tensor<S> task_loss(Tape<S>& tape, const Tensor<S>& logits, const tasks::TaskBatch& batch);

/// Running loss and task metric over batches, weighted by the number of
/// scored predictions in each batch.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(tasks::MetricKind kind) : kind_(kind) {}

  void add(const tasks::TaskBatch& batch, const Tensor<float>& logits, double loss);
  void reset() { *this = MetricAccumulator(kind_); }

  bool empty() const { return weight_ == 0; }
  double loss() const { return weight_ > 0 ? loss_sum_ / weight_ : 0.0; }
  double metric() const;
  tasks::MetricKind kind() const { return kind_; }

 private:
  tasks::MetricKind kind_;
  double loss_sum_ = 0;
  double weight_ = 0;
  std::uint64_t correct_ = 0;
  std::uint64_t scored_ = 0;
};

}  // namespace tcnlab::train

#include "tcnlab/train/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcnlab/ops.hpp"

namespace tcnlab::train {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

tasks::MetricKind parse_metric_kind(const std::string& s) {
  using tasks::MetricKind;
  for (auto k : {MetricKind::kMse, MetricKind::kAccuracy, MetricKind::kPayloadAccuracy, MetricKind::kNll,
                 MetricKind::kBpc}) {
    if (tasks::to_string(k) == s) return k;
  }
  throw FormatError("unknown metric kind '" + s + "'", 0);
}

std::size_t argmax_at(const float* logits, std::size_t classes, std::size_t stride) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c)
    if (logits[c * stride] > logits[best * stride]) best = c;
  return best;
}

}  // namespace

std::string format_row(const MetricsRow& r) {
  std::ostringstream out;
  out << r.step << ',' << r.epoch << ',' << r.split << ',' << fmt(r.loss) << ',' << fmt(r.metric) << ','
      << tasks::to_string(r.metric_kind) << ',' << (r.fraction_of_baseline ? fmt(*r.fraction_of_baseline) : "")
      << ',' << fmt(r.lr) << ',' << r.wall_ms;
  return out.str();
}

MetricsRow parse_row(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  f.push_back(cur);
  if (f.size() != 9) throw FormatError("metrics row needs 9 fields, got " + std::to_string(f.size()), 0);
  auto num = [&](std::size_t i) {
    double v = 0;
    auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
    if (res.ec != std::errc()) throw FormatError("bad number '" + f[i] + "' in metrics row", 0);
    return v;
  };
  MetricsRow r;
  r.step = static_cast<std::uint64_t>(num(0));
  r.epoch = static_cast<std::uint64_t>(num(1));
  r.split = f[2];
  r.loss = num(3);
  r.metric = num(4);
  r.metric_kind = parse_metric_kind(f[5]);
  if (!f[6].empty()) r.fraction_of_baseline = num(6);
  r.lr = num(7);
  r.wall_ms = static_cast<std::uint64_t>(num(8));
  return r;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw FormatError(path + ": missing or unexpected metrics header", 0);
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_row(line));
  }
  return rows;
}

template <typename S>
Tensor<S> task_loss(Tape<S>& tape, const Tensor<S>& logits, const tasks::TaskBatch& batch) {
  using tasks::LossKind;
  auto real_targets = [&] {
    if constexpr (std::is_same_v<S, float>) {
      return batch.targets;
    } else {
      return batch.targets.template cast<S>();
    }
  };
  switch (batch.loss_kind) {
    case LossKind::kMseLastStep: return mse(tape, logits, real_targets());
    case LossKind::kCeLastStep:
    case LossKind::kCePerStep:
    case LossKind::kCePerToken: return cross_entropy(tape, logits, std::span<const std::int32_t>(batch.labels));
    case LossKind::kBernoulliPerStep: return bernoulli_nll(tape, logits, real_targets());
  }
  throw ContractError("unknown loss kind");
}

template Tensor<float> task_loss(Tape<float>&, const Tensor<float>&, const tasks::TaskBatch&);
template Tensor<double> task_loss(Tape<double>&, const Tensor<double>&, const tasks::TaskBatch&);

void MetricAccumulator::add(const tasks::TaskBatch& batch, const Tensor<float>& logits, double loss) {
  using tasks::MetricKind;
  const std::size_t b = batch.batch_size();
  const bool per_step = logits.rank() == 3;
  const double w = per_step ? static_cast<double>(b * logits.dim(2)) : static_cast<double>(b);
  loss_sum_ += loss * w;
  weight_ += w;

  if (kind_ == MetricKind::kAccuracy) {
    const std::size_t c = logits.dim(1);
    for (std::size_t i = 0; i < b; ++i) {
      if (argmax_at(logits.ptr() + i * c, c, 1) == static_cast<std::size_t>(batch.labels[i])) ++correct_;
      ++scored_;
    }
  } else if (kind_ == MetricKind::kPayloadAccuracy) {
    const std::size_t c = logits.dim(1), t_len = logits.dim(2);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t t = 0; t < t_len; ++t) {
        if (batch.mask[i * t_len + t] == 0.0f) continue;
        const float* base = logits.ptr() + i * c * t_len + t;
        if (argmax_at(base, c, t_len) == static_cast<std::size_t>(batch.labels[i * t_len + t])) ++correct_;
        ++scored_;
      }
    }
  }
}

double MetricAccumulator::metric() const {
  using tasks::MetricKind;
  switch (kind_) {
    case MetricKind::kMse:
    case MetricKind::kNll: return loss();
    case MetricKind::kBpc: return tasks::bits_per_char(loss());
    case MetricKind::kAccuracy:
    case MetricKind::kPayloadAccuracy:
      return scored_ > 0 ? static_cast<double>(correct_) / static_cast<double>(scored_) : 0.0;
  }
  return 0.0;
}

}  // namespace tcnlab::train

#include "tcnlab/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tcnlab/ops.hpp"

namespace tcnlab::train {

namespace fs = std::filesystem;

MetricsRow evaluate(const nn::SequenceModel<float>& model, const std::vector<tasks::TaskBatch>& batches,
                    tasks::MetricKind metric, std::optional<double> baseline, const std::string& split) {
  MetricAccumulator acc(metric);
  Rng unused(0);
  for (const auto& batch : batches) {
    if (batch.empty()) continue;
    Tape<float> tape(Tape<float>::Mode::kInference);
    Tensor<float> logits = model.forward(tape, batch.input, false, unused);
    Tensor<float> loss = task_loss(tape, logits, batch);
    acc.add(batch, logits, loss.item());
  }
  MetricsRow row;
  row.split = split;
  row.loss = acc.loss();
  row.metric = acc.metric();
  row.metric_kind = metric;
  if (baseline && *baseline > 0) row.fraction_of_baseline = row.loss / *baseline;
  return row;
}

std::string resolved_config_text(const ExperimentConfig& cfg, std::size_t param_count) {
  std::ostringstream out;
  out << "# config_hash = " << hash_hex(config_hash(cfg)) << '\n';
  out << "# param_count = " << param_count << '\n';
  out << "# precision = float32 training, float64 gradient checks\n";
  if (cfg.task.kind == tasks::TaskKind::kSeqMnist || cfg.task.kind == tasks::TaskKind::kPermutedMnist) {
    out << "# pixels = scaled to [0,1], no mean-centering\n";
  }
  out << "# input_encoding = " << nn::to_string(cfg.model.encoding) << '\n';
  out << to_ini(cfg);
  return out.str();
}

std::size_t count_params(const ExperimentConfig& cfg) {
  std::size_t vocab = 0;
  if (cfg.task.kind == tasks::TaskKind::kChar) {
    vocab = tasks::load_char_corpus(resolve_data_path(cfg.task.corpus_path), cfg.task.train_frac,
                                    cfg.task.valid_frac)
                .vocab_size();
  }
  Rng rng(0);
  auto model = nn::make_model<float>(cfg.model, model_io(cfg, vocab), rng);
  return model->params().count();
}

namespace {

class MetricsWriter {
 public:
  MetricsWriter(const fs::path& path, const std::vector<MetricsRow>& keep) : out_(path, std::ios::trunc) {
    if (!out_) throw Error("cannot write '" + path.string() + "'");
    out_ << kMetricsHeader << '\n';
    for (const auto& r : keep) out_ << format_row(r) << '\n';
    out_.flush();
  }
  void write(const MetricsRow& r) {
    out_ << format_row(r) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, Stream::kShuffle, epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

RunResult train(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.train.out_dir.empty()) throw ConfigError("train.out_dir is not set");
  if (cfg.train.batch_size == 0) throw ConfigError("train.batch_size must be positive");

  const auto t0 = std::chrono::steady_clock::now();
  auto wall_ms = [&]() -> std::uint64_t {
    if (!cfg.train.record_wall_ms) return 0;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
  };

  auto data = load_task_data(cfg);
  Rng init_rng = make_rng(cfg.train.seed, Stream::kInit);
  auto model = nn::make_model<float>(cfg.model, data->io(), init_rng);
  auto& params = model->params();
  Optimizer<float> opt(cfg.optim, params);
  std::optional<PlateauScheduler> sched;
  if (cfg.train.plateau_patience > 0) {
    sched.emplace(cfg.optim.lr, cfg.train.plateau_patience, cfg.train.plateau_factor);
  }

  const fs::path dir(cfg.train.out_dir);
  fs::create_directories(dir);
  const std::string hash = hash_hex(config_hash(cfg));

  RunResult result;
  result.param_count = params.count();

  std::uint64_t step = 0;
  std::vector<MetricsRow> kept;
  if (opts.resume) {
    TrainerState st = checkpoint_load((dir / kCheckpointFile).string(), params, opt, hash);
    step = st.step;
    if (sched) sched->restore({st.lr, st.sched_has_best, st.sched_best, st.sched_bad, st.sched_reductions});
    if (fs::exists(dir / kMetricsFile)) {
      for (auto& r : read_metrics((dir / kMetricsFile).string()))
        if (r.step <= step) kept.push_back(r);
    }
  }
  {
    std::ofstream out(dir / kConfigFile);
    if (!out) throw Error("cannot write '" + (dir / kConfigFile).string() + "'");
    out << resolved_config_text(cfg, result.param_count);
  }
  MetricsWriter writer(dir / kMetricsFile, kept);

  const std::size_t n = data->train_examples();
  const std::size_t bs = std::min(data->batch_size_for(cfg.train.batch_size), n);
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  const std::uint64_t total = cfg.train.max_steps > 0 ? cfg.train.max_steps : cfg.train.epochs * steps_per_epoch;
  const std::uint64_t eval_every = cfg.train.eval_every > 0 ? cfg.train.eval_every : steps_per_epoch;
  const auto metric = tasks::metric_for(cfg.task.kind);
  const auto baseline = data->baseline();
  const float clip = static_cast<float>(cfg.train.grad_clip);

  std::vector<tasks::TaskBatch> valid, test;
  if (data->has_split(Split::kValid)) valid = data->eval_batches(Split::kValid, cfg.train.eval_batch_size);
  if (data->has_split(Split::kTest)) test = data->eval_batches(Split::kTest, cfg.train.eval_batch_size);

  std::vector<Tensor<float>> grads_of = params.tensors();
  MetricAccumulator train_acc(metric);
  std::vector<std::size_t> order;
  std::uint64_t order_epoch = UINT64_MAX;

  auto save = [&](std::uint64_t at) {
    TrainerState st;
    st.step = at;
    st.epoch = at / steps_per_epoch;
    st.lr = opt.lr();
    if (sched) {
      const auto s = sched->state();
      st.sched_has_best = s.has_best;
      st.sched_best = s.best;
      st.sched_bad = s.bad;
      st.sched_reductions = s.reductions;
    }
    checkpoint_save((dir / kCheckpointFile).string(), params, opt, hash, st);
  };

  auto emit = [&](MetricsRow row, std::uint64_t at, double lr) {
    row.step = at;
    row.epoch = (at - 1) / steps_per_epoch;
    row.lr = lr;
    row.wall_ms = wall_ms();
    writer.write(row);
    result.rows.push_back(row);
    return row;
  };

  while (step < total) {
    const std::uint64_t epoch = step / steps_per_epoch;
    const std::size_t pos = step % steps_per_epoch;
    if (epoch != order_epoch) {
      order = epoch_order(n, cfg.train.seed, epoch);
      order_epoch = epoch;
    }
    const std::size_t begin = pos * bs;
    const std::size_t end = std::min(begin + bs, n);
    const tasks::TaskBatch batch =
        data->train_batch(std::span<const std::size_t>(order.data() + begin, end - begin));

    Rng dropout_rng = make_rng(cfg.train.seed, Stream::kDropout, step);
    double loss_value = 0;
    {
      Tape<float> tape;
      Tensor<float> logits = model->forward(tape, batch.input, true, dropout_rng);
      Tensor<float> loss = task_loss(tape, logits, batch);
      loss_value = loss.item();
      if (!std::isfinite(loss_value)) {
        throw NumericalError("non-finite training loss at step " + std::to_string(step + 1));
      }
      tape.backward(loss);
      if (clip > 0) clip_grad_global_norm(std::span<Tensor<float>>(grads_of), clip);
      opt.step(params);
      params.zero_grad();
      train_acc.add(batch, logits, loss_value);
    }
    ++step;

    if (step % eval_every == 0 || step == total) {
      const double lr = opt.lr();
      MetricsRow tr;
      tr.split = "train";
      tr.loss = train_acc.loss();
      tr.metric = train_acc.metric();
      tr.metric_kind = metric;
      if (baseline && *baseline > 0) tr.fraction_of_baseline = tr.loss / *baseline;
      result.final_train = emit(tr, step, lr);
      train_acc.reset();

      std::optional<double> monitor;
      if (!valid.empty()) {
        MetricsRow v = emit(evaluate(*model, valid, metric, baseline, "valid"), step, lr);
        monitor = v.loss;
      }
      if (!test.empty()) result.final_test = emit(evaluate(*model, test, metric, baseline, "test"), step, lr);
      if (sched) {
        opt.set_lr(sched->observe(monitor.value_or(tr.loss)));
      }
      if (opts.log) {
        *opts.log << cfg.name << " step " << step << "/" << total << " train_loss " << tr.loss;
        if (result.final_test && result.final_test->step == step) {
          *opts.log << " test_loss " << result.final_test->loss << " test_" << tasks::to_string(metric) << " "
                    << result.final_test->metric;
        }
        *opts.log << std::endl;
      }
    }
    if (opts.stop_at_step > 0 && step >= opts.stop_at_step && step < total) {
      save(step);
      result.steps = step;
      return result;
    }
  }
  save(step);
  result.steps = step;
  result.completed = true;
  return result;
}

}  // namespace tcnlab::train

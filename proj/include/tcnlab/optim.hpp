#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcnlab/nn/params.hpp"

namespace tcnlab {

enum class OptimizerKind { kAdam, kSgd, kRmsprop };

OptimizerKind parse_optimizer_kind(const std::string& s);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 0.002;
  double beta1 = 0.9;    // Adam
  double beta2 = 0.999;  // Adam
  double eps = 1e-8;     // Adam, RMSprop
  double alpha = 0.99;   // RMSprop smoothing
  double momentum = 0.0; // SGD
  double weight_decay = 0.0;
};

/// Per-parameter state buffer, e.g. "tcn.block0.conv1.v:m".
template <typename S>
struct StateBuffer {
  std::string name;
  std::vector<S> data;
};

/// In-place update rules. Buffers mirror the parameter shapes.
///
///   adam:    bias-corrected first/second moments
///   rmsprop: running mean square, p -= lr * g / (sqrt(ms) + eps)
///   sgd:     optional heavy-ball momentum
template <typename S>
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, const nn::ParamStore<S>& params);

  /// Applies one update from the current gradients. Throws NumericalError
  /// naming the first parameter whose gradient is not finite; parameters are
  /// left untouched in that case.
  void step(nn::ParamStore<S>& params);

  const OptimizerConfig& config() const { return config_; }
  double lr() const { return config_.lr; }
  void set_lr(double lr) { config_.lr = lr; }
  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t steps) { steps_ = steps; }

  std::vector<StateBuffer<S>>& buffers() { return buffers_; }
  const std::vector<StateBuffer<S>>& buffers() const { return buffers_; }

 private:
  std::size_t slots() const;

  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<StateBuffer<S>> buffers_;  // slots() consecutive entries per parameter
};

/// Halves (by `factor`) the learning rate after `patience` consecutive
/// evaluations without relative improvement of at least `threshold`.
class PlateauScheduler {
 public:
  enum class Mode { kMin, kMax };

  PlateauScheduler(double lr, std::size_t patience, double factor = 0.5, Mode mode = Mode::kMin,
                   double threshold = 1e-4);

  /// Feeds one evaluation result; returns the (possibly reduced) lr.
  double observe(double metric);

  double lr() const { return lr_; }
  std::size_t reductions() const { return reductions_; }

  struct State {
    double lr = 0;
    bool has_best = false;
    double best = 0;
    std::size_t bad = 0;
    std::size_t reductions = 0;
  };
  State state() const { return {lr_, has_best_, best_, bad_, reductions_}; }
  void restore(const State& s) {
    lr_ = s.lr;
    has_best_ = s.has_best;
    best_ = s.best;
    bad_ = s.bad;
    reductions_ = s.reductions;
  }

 private:
  bool improved(double metric) const;

  double lr_;
  std::size_t patience_;
  double factor_;
  Mode mode_;
  double threshold_;
  bool has_best_ = false;
  double best_ = 0;
  std::size_t bad_ = 0;
  std::size_t reductions_ = 0;
};

/// Replays `history` (lower is better) through a PlateauScheduler.
double anneal_on_plateau(double lr, std::span<const double> history, double factor, std::size_t patience);

}  // namespace tcnlab

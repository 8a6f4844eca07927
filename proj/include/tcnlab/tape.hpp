#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "tcnlab/tensor.hpp"

namespace tcnlab {

/// Records differentiable operations in execution order so backward() can
/// replay their gradient rules in reverse.
///
/// An inference tape records nothing and ops on it never produce tensors that
/// require gradients.
template <typename S>
class Tape {
 public:
  enum class Mode { kTraining, kInference };

  struct Record {
    std::vector<Tensor<S>> inputs;
    Tensor<S> output;
    std::function<void()> backward_rule;
  };

  Tape() = default;
  explicit Tape(Mode mode) : mode_(mode) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return mode_ == Mode::kTraining; }

  /// True when an op over these inputs must be recorded.
  bool needs_grad(std::initializer_list<const Tensor<S>*> inputs) const {
    if (!recording()) return false;
    for (const auto* t : inputs)
      if (t && t->defined() && t->requires_grad()) return true;
    return false;
  }

  void record(std::vector<Tensor<S>> inputs, Tensor<S> output, std::function<void()> rule) {
    output.set_requires_grad(true);
    records_.push_back({std::move(inputs), std::move(output), std::move(rule)});
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }

  /// Seeds d(loss)/d(loss) = 1 and runs every gradient rule once, newest
  /// first. Returns the number of records visited.
  std::size_t backward(Tensor<S>& loss) {
    if (loss.numel() != 1 || loss.rank() != 0) {
      throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
    }
    if (backward_done_) throw ContractError("backward() already ran on this tape");
    bool found = false;
    for (const auto& r : records_) {
      if (r.output.same(loss)) {
        found = true;
        break;
      }
    }
    if (!found) throw ContractError("loss was not produced on this tape");

    loss.grad()[0] += S(1);
    std::size_t visited = 0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
      ++visited;
      if (it->output.has_grad()) it->backward_rule();
    }
    backward_done_ = true;
    return visited;
  }

 private:
  Mode mode_ = Mode::kTraining;
  bool backward_done_ = false;
  std::vector<Record> records_;
};

template <typename S>
std::size_t backward(Tensor<S>& loss, Tape<S>& tape) {
  return tape.backward(loss);
}

}  // namespace tcnlab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcnlab/nn/params.hpp"
#include "tcnlab/ops.hpp"

namespace tcnlab::nn {

/// Dilated causal conv layers per residual block.
inline constexpr std::size_t kConvsPerBlock = 2;

/// Standard deviation of the Gaussian used for every TCN weight.
inline constexpr double kTcnInitStd = 0.01;

struct TcnSpec {
  std::size_t input_ch = 1;
  std::vector<std::size_t> level_channels;  // hidden width per level; size() is the depth n
  std::size_t kernel_size = 2;
  double dropout = 0.0;
  bool use_residual = true;
  bool use_gating = false;
  std::size_t dilation_base = 2;

  std::size_t levels() const { return level_channels.size(); }
  std::size_t dilation(std::size_t level) const;
  std::size_t output_ch() const { return level_channels.empty() ? input_ch : level_channels.back(); }
  /// Throws DomainError on a zero size, no levels, or dropout outside [0, 1).
  void validate() const;
};

/// Effective history of a stack of `levels` residual blocks:
/// 1 + convs_per_block * (k - 1) * sum_{i<levels} base^i.
std::uint64_t receptive_field(std::uint64_t kernel_size, std::uint64_t levels, std::uint64_t dilation_base = 2,
                              std::uint64_t convs_per_block = kConvsPerBlock);

/// Smallest depth whose receptive field reaches `target`.
std::uint64_t min_levels_for(std::uint64_t kernel_size, std::uint64_t target, std::uint64_t dilation_base = 2);

/// Weight-normalized causal convolution: w = g * v / ||v||.
template <typename S>
struct WnConv {
  Tensor<S> v;     // [out, in, k]
  Tensor<S> g;     // [out]
  Tensor<S> bias;  // [out]

  WnConv() = default;
  WnConv(std::size_t out_ch, std::size_t in_ch, std::size_t k);
  /// v ~ N(0, std); g = ||v|| per channel, so the effective weight equals the sample.
  void init(Rng& rng, double stddev);
  void register_params(ParamStore<S>& store, const std::string& prefix) const;
  Tensor<S> forward(Tape<S>& tape, const Tensor<S>& x, std::size_t dilation) const;
};

/// Residual block: two (weight-normalized conv -> ReLU -> channel dropout)
/// stages, then ReLU(x + F(x)). A 1x1 conv projects x when the widths differ.
/// With gating, each stage computes A * sigmoid(B) from two parallel convs.
template <typename S>
class TemporalBlock {
 public:
  TemporalBlock(std::size_t in_ch, std::size_t out_ch, std::size_t kernel_size, std::size_t dilation,
                double dropout, bool use_residual, bool use_gating);

  void init(Rng& rng, double stddev = kTcnInitStd);
  void register_params(ParamStore<S>& store, const std::string& prefix) const;
  Tensor<S> forward(Tape<S>& tape, const Tensor<S>& x, bool training, Rng& rng) const;

  std::size_t in_ch() const { return in_ch_; }
  std::size_t out_ch() const { return out_ch_; }
  std::size_t dilation() const { return dilation_; }
  bool has_projection() const { return down_w.defined(); }
  bool gated() const { return use_gating_; }

  WnConv<S> conv1, conv2;
  WnConv<S> gate1, gate2;  // only with gating
  Tensor<S> down_w;        // [out, in, 1], only when in != out and residual on
  Tensor<S> down_b;

 private:
  Tensor<S> stage(Tape<S>& tape, const Tensor<S>& x, const WnConv<S>& conv, const WnConv<S>& gate,
                  bool training, Rng& rng) const;

  std::size_t in_ch_, out_ch_, kernel_size_, dilation_;
  double dropout_;
  bool use_residual_, use_gating_;
};

/// Stack of temporal blocks with dilation base^i at level i.
template <typename S>
class Tcn {
 public:
  explicit Tcn(const TcnSpec& spec);

  void init(Rng& rng, double stddev = kTcnInitStd);
  void register_params(ParamStore<S>& store, const std::string& prefix) const;
  Tensor<S> forward(Tape<S>& tape, const Tensor<S>& x, bool training, Rng& rng) const;

  const TcnSpec& spec() const { return spec_; }
  std::vector<TemporalBlock<S>>& blocks() { return blocks_; }
  const std::vector<TemporalBlock<S>>& blocks() const { return blocks_; }

 private:
  TcnSpec spec_;
  std::vector<TemporalBlock<S>> blocks_;
};

template <typename S>
Tensor<S> temporal_block_forward(Tape<S>& tape, const Tensor<S>& x, const TemporalBlock<S>& block,
                                 bool training, Rng& rng) {
  return block.forward(tape, x, training, rng);
}

template <typename S>
Tensor<S> glu_block_forward(Tape<S>& tape, const Tensor<S>& x, const TemporalBlock<S>& block, bool training,
                            Rng& rng) {
  if (!block.gated()) throw ContractError("glu_block_forward on a block built without gating");
  return block.forward(tape, x, training, rng);
}

template <typename S>
Tensor<S> tcn_forward(Tape<S>& tape, const Tensor<S>& x, const Tcn<S>& tcn, bool training, Rng& rng) {
  return tcn.forward(tape, x, training, rng);
}

}  // namespace tcnlab::nn

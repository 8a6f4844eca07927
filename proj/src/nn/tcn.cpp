#include "tcnlab/nn/tcn.hpp"

#include <cmath>
#include <limits>

namespace tcnlab::nn {

std::size_t TcnSpec::dilation(std::size_t level) const {
  std::size_t d = 1;
  for (std::size_t i = 0; i < level; ++i) d *= dilation_base;
  return d;
}

void TcnSpec::validate() const {
  if (kernel_size < 1) throw DomainError("TcnSpec: kernel size must be >= 1");
  if (level_channels.empty()) throw DomainError("TcnSpec: need at least one level");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("TcnSpec: dropout must lie in [0, 1)");
  if (dilation_base < 1) throw DomainError("TcnSpec: dilation base must be >= 1");
  if (input_ch < 1) throw DomainError("TcnSpec: input channels must be >= 1");
  for (auto c : level_channels)
    if (c < 1) throw DomainError("TcnSpec: level width must be >= 1");
}

std::uint64_t receptive_field(std::uint64_t kernel_size, std::uint64_t levels, std::uint64_t dilation_base,
                              std::uint64_t convs_per_block) {
  if (kernel_size < 1 || levels < 1) throw DomainError("receptive_field: need k >= 1 and n >= 1");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t dilation_sum = 0, d = 1;
  for (std::uint64_t i = 0; i < levels; ++i) {
    if (dilation_sum > kMax - d) throw DomainError("receptive_field: overflow");
    dilation_sum += d;
    if (i + 1 < levels) {
      if (dilation_base != 0 && d > kMax / dilation_base) throw DomainError("receptive_field: overflow");
      d *= dilation_base;
    }
  }
  const std::uint64_t per_tap = convs_per_block * (kernel_size - 1);
  if (per_tap != 0 && dilation_sum > (kMax - 1) / per_tap) throw DomainError("receptive_field: overflow");
  return 1 + per_tap * dilation_sum;
}

std::uint64_t min_levels_for(std::uint64_t kernel_size, std::uint64_t target, std::uint64_t dilation_base) {
  if (kernel_size < 2 && target > 1) throw DomainError("min_levels_for: k = 1 never grows the receptive field");
  if (dilation_base < 2 && kernel_size < 2) throw DomainError("min_levels_for: unreachable target");
  for (std::uint64_t n = 1; n < 64; ++n)
    if (receptive_field(kernel_size, n, dilation_base) >= target) return n;
  throw DomainError("min_levels_for: target " + std::to_string(target) + " unreachable");
}

template <typename S>
WnConv<S>::WnConv(std::size_t out_ch, std::size_t in_ch, std::size_t k)
    : v({out_ch, in_ch, k}), g({out_ch}), bias({out_ch}) {}

template <typename S>
void WnConv<S>::init(Rng& rng, double stddev) {
  fill_normal(v, rng, stddev);
  const std::size_t outs = v.dim(0);
  const std::size_t inner = v.numel() / outs;
  for (std::size_t o = 0; o < outs; ++o) {
    double sq = 0;
    for (std::size_t j = 0; j < inner; ++j) sq += double(v.data()[o * inner + j]) * v.data()[o * inner + j];
    g.data()[o] = static_cast<S>(std::sqrt(sq));
  }
  std::fill(bias.data().begin(), bias.data().end(), S(0));
}

template <typename S>
void WnConv<S>::register_params(ParamStore<S>& store, const std::string& prefix) const {
  store.add(prefix + ".v", v);
  store.add(prefix + ".g", g);
  store.add(prefix + ".bias", bias);
}

template <typename S>
Tensor<S> WnConv<S>::forward(Tape<S>& tape, const Tensor<S>& x, std::size_t dilation) const {
  return conv1d_causal(tape, x, weight_norm(tape, v, g), bias, dilation);
}

template <typename S>
TemporalBlock<S>::TemporalBlock(std::size_t in_ch, std::size_t out_ch, std::size_t kernel_size,
                                std::size_t dilation, double dropout, bool use_residual, bool use_gating)
    : conv1(out_ch, in_ch, kernel_size),
      conv2(out_ch, out_ch, kernel_size),
      in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_size_(kernel_size),
      dilation_(dilation),
      dropout_(dropout),
      use_residual_(use_residual),
      use_gating_(use_gating) {
  if (use_gating) {
    gate1 = WnConv<S>(out_ch, in_ch, kernel_size);
    gate2 = WnConv<S>(out_ch, out_ch, kernel_size);
  }
  if (use_residual && in_ch != out_ch) {
    down_w = Tensor<S>({out_ch, in_ch, 1});
    down_b = Tensor<S>({out_ch});
  }
}

template <typename S>
void TemporalBlock<S>::init(Rng& rng, double stddev) {
  conv1.init(rng, stddev);
  conv2.init(rng, stddev);
  if (use_gating_) {
    gate1.init(rng, stddev);
    gate2.init(rng, stddev);
  }
  if (down_w.defined()) {
    fill_normal(down_w, rng, stddev);
    std::fill(down_b.data().begin(), down_b.data().end(), S(0));
  }
}

template <typename S>
void TemporalBlock<S>::register_params(ParamStore<S>& store, const std::string& prefix) const {
  conv1.register_params(store, prefix + ".conv1");
  if (use_gating_) gate1.register_params(store, prefix + ".gate1");
  conv2.register_params(store, prefix + ".conv2");
  if (use_gating_) gate2.register_params(store, prefix + ".gate2");
  if (down_w.defined()) {
    store.add(prefix + ".down.w", down_w);
    store.add(prefix + ".down.bias", down_b);
  }
}

template <typename S>
Tensor<S> TemporalBlock<S>::stage(Tape<S>& tape, const Tensor<S>& x, const WnConv<S>& conv,
                                  const WnConv<S>& gate, bool training, Rng& rng) const {
  Tensor<S> h = conv.forward(tape, x, dilation_);
  if (use_gating_) {
    h = mul(tape, h, sigmoid(tape, gate.forward(tape, x, dilation_)));
  } else {
    h = relu(tape, h);
  }
  return channel_dropout(tape, h, dropout_, training, rng);
}

template <typename S>
Tensor<S> TemporalBlock<S>::forward(Tape<S>& tape, const Tensor<S>& x, bool training, Rng& rng) const {
  if (x.rank() != 3 || x.dim(1) != in_ch_) {
    throw ShapeError("temporal block expects [B, " + std::to_string(in_ch_) + ", T], got " +
                     shape_str(x.shape()));
  }
  Tensor<S> h = stage(tape, x, conv1, gate1, training, rng);
  h = stage(tape, h, conv2, gate2, training, rng);
  if (!use_residual_) return relu(tape, h);
  Tensor<S> skip = down_w.defined() ? conv1d_causal(tape, x, down_w, down_b, 1) : x;
  return relu(tape, add(tape, h, skip));
}

template <typename S>
Tcn<S>::Tcn(const TcnSpec& spec) : spec_(spec) {
  spec_.validate();
  std::size_t in = spec_.input_ch;
  for (std::size_t i = 0; i < spec_.levels(); ++i) {
    const std::size_t out = spec_.level_channels[i];
    blocks_.emplace_back(in, out, spec_.kernel_size, spec_.dilation(i), spec_.dropout, spec_.use_residual,
                         spec_.use_gating);
    in = out;
  }
}

template <typename S>
void Tcn<S>::init(Rng& rng, double stddev) {
  for (auto& b : blocks_) b.init(rng, stddev);
}

template <typename S>
void Tcn<S>::register_params(ParamStore<S>& store, const std::string& prefix) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i].register_params(store, prefix + ".block" + std::to_string(i));
}

template <typename S>
Tensor<S> Tcn<S>::forward(Tape<S>& tape, const Tensor<S>& x, bool training, Rng& rng) const {
  Tensor<S> h = x;
  for (const auto& b : blocks_) h = b.forward(tape, h, training, rng);
  return h;
}

template struct WnConv<float>;
template struct WnConv<double>;
template class TemporalBlock<float>;
template class TemporalBlock<double>;
template class Tcn<float>;
template class Tcn<double>;

}  // namespace tcnlab::nn

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tcnlab/nn/params.hpp"
#include "tcnlab/ops.hpp"

namespace tcnlab::nn {

enum class CellKind { kLstm, kGru, kVanilla };

/// Gate blocks stacked in the fused weight matrices (LSTM i,f,g,o; GRU r,z,n).
constexpr std::size_t gate_count(CellKind kind) {
  switch (kind) {
    case CellKind::kLstm: return 4;
    case CellKind::kGru: return 3;
    case CellKind::kVanilla: return 1;
  }
  return 1;
}

struct RnnSpec {
  CellKind cell_kind = CellKind::kLstm;
  std::size_t input_ch = 1;
  std::size_t hidden_size = 1;
  std::size_t num_layers = 1;
  double dropout = 0.0;           // between stacked layers
  double forget_gate_bias = 1.0;  // LSTM only

  void validate() const;
};

template <typename S>
struct RnnCellParams {
  Tensor<S> w_x;  // [in, G*H]
  Tensor<S> w_h;  // [H, G*H]
  Tensor<S> b_x;  // [G*H]
  Tensor<S> b_h;  // [G*H], GRU only (the reset gate scales the recurrent candidate term)
};

template <typename S>
struct RnnState {
  Tensor<S> h;  // [B, H]
  Tensor<S> c;  // [B, H], LSTM only
};

/// One time step of a single cell. Returns (output h, new state).
///
///   LSTM:    i,f,g,o from x W_x + h W_h + b; c' = f*c + i*g; h' = o*tanh(c')
///   GRU:     r,z from sigmoid; n = tanh(xn + r*(hn + b_hn)); h' = n + z*(h - n)
///   vanilla: h' = tanh(x W_x + h W_h + b)
template <typename S>
std::pair<Tensor<S>, RnnState<S>> rnn_cell_step(Tape<S>& tape, CellKind kind, const Tensor<S>& x_t,
                                                const RnnState<S>& state, const RnnCellParams<S>& params);

/// Stacked recurrent network unrolled over the full input.
template <typename S>
class Rnn {
 public:
  explicit Rnn(const RnnSpec& spec);

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) for all weights and biases, then the LSTM
  /// forget-gate bias block is set to spec.forget_gate_bias.
  void init(Rng& rng);
  void register_params(ParamStore<S>& store, const std::string& prefix) const;

  RnnState<S> zero_state(std::size_t batch) const;

  /// x: [B, C, T]. Returns the top layer's h at every step.
  std::vector<Tensor<S>> forward(Tape<S>& tape, const Tensor<S>& x, bool training, Rng& rng) const;

  const RnnSpec& spec() const { return spec_; }
  std::vector<RnnCellParams<S>>& layers() { return layers_; }
  const std::vector<RnnCellParams<S>>& layers() const { return layers_; }

 private:
  RnnSpec spec_;
  std::vector<RnnCellParams<S>> layers_;
};

}  // namespace tcnlab::nn

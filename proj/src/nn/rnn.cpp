#include "tcnlab/nn/rnn.hpp"

#include <cmath>

namespace tcnlab::nn {

void RnnSpec::validate() const {
  if (hidden_size < 1) throw DomainError("RnnSpec: hidden size must be >= 1");
  if (num_layers < 1) throw DomainError("RnnSpec: need at least one layer");
  if (input_ch < 1) throw DomainError("RnnSpec: input channels must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw DomainError("RnnSpec: dropout must lie in [0, 1)");
}

template <typename S>
std::pair<Tensor<S>, RnnState<S>> rnn_cell_step(Tape<S>& tape, CellKind kind, const Tensor<S>& x_t,
                                                const RnnState<S>& state, const RnnCellParams<S>& params) {
  const std::size_t hidden = params.w_h.dim(0);
  if (state.h.rank() != 2 || state.h.dim(1) != hidden || state.h.dim(0) != x_t.dim(0)) {
    throw ShapeError("rnn_cell_step: state " + shape_str(state.h.shape()) + " does not match hidden size " +
                     std::to_string(hidden));
  }
  const Tensor<S>& h = state.h;
  switch (kind) {
    case CellKind::kVanilla: {
      Tensor<S> pre = add(tape, add(tape, matmul(tape, x_t, params.w_x), matmul(tape, h, params.w_h)), params.b_x);
      Tensor<S> h_new = tanh(tape, pre);
      return {h_new, RnnState<S>{h_new, {}}};
    }
    case CellKind::kLstm: {
      if (!state.c.defined() || state.c.shape() != h.shape()) throw ShapeError("rnn_cell_step: LSTM needs a cell state");
      Tensor<S> gates =
          add(tape, add(tape, matmul(tape, x_t, params.w_x), matmul(tape, h, params.w_h)), params.b_x);
      Tensor<S> i = sigmoid(tape, slice_cols(tape, gates, 0, hidden));
      Tensor<S> f = sigmoid(tape, slice_cols(tape, gates, hidden, hidden));
      Tensor<S> g = tanh(tape, slice_cols(tape, gates, 2 * hidden, hidden));
      Tensor<S> o = sigmoid(tape, slice_cols(tape, gates, 3 * hidden, hidden));
      Tensor<S> c_new = add(tape, mul(tape, f, state.c), mul(tape, i, g));
      Tensor<S> h_new = mul(tape, o, tanh(tape, c_new));
      return {h_new, RnnState<S>{h_new, c_new}};
    }
    case CellKind::kGru: {
      Tensor<S> gx = add(tape, matmul(tape, x_t, params.w_x), params.b_x);
      Tensor<S> gh = add(tape, matmul(tape, h, params.w_h), params.b_h);
      Tensor<S> r = sigmoid(tape, add(tape, slice_cols(tape, gx, 0, hidden), slice_cols(tape, gh, 0, hidden)));
      Tensor<S> z =
          sigmoid(tape, add(tape, slice_cols(tape, gx, hidden, hidden), slice_cols(tape, gh, hidden, hidden)));
      Tensor<S> n = tanh(tape, add(tape, slice_cols(tape, gx, 2 * hidden, hidden),
                                   mul(tape, r, slice_cols(tape, gh, 2 * hidden, hidden))));
      Tensor<S> h_new = add(tape, n, mul(tape, z, sub(tape, h, n)));
      return {h_new, RnnState<S>{h_new, {}}};
    }
  }
  throw ContractError("rnn_cell_step: unknown cell kind");
}

template <typename S>
Rnn<S>::Rnn(const RnnSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t gates = gate_count(spec_.cell_kind) * spec_.hidden_size;
  for (std::size_t l = 0; l < spec_.num_layers; ++l) {
    const std::size_t in = l == 0 ? spec_.input_ch : spec_.hidden_size;
    RnnCellParams<S> p;
    p.w_x = Tensor<S>({in, gates});
    p.w_h = Tensor<S>({spec_.hidden_size, gates});
    p.b_x = Tensor<S>({gates});
    if (spec_.cell_kind == CellKind::kGru) p.b_h = Tensor<S>({gates});
    layers_.push_back(std::move(p));
  }
}

template <typename S>
void Rnn<S>::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.hidden_size));
  for (auto& p : layers_) {
    fill_uniform(p.w_x, rng, bound);
    fill_uniform(p.w_h, rng, bound);
    fill_uniform(p.b_x, rng, bound);
    if (p.b_h.defined()) fill_uniform(p.b_h, rng, bound);
    if (spec_.cell_kind == CellKind::kLstm) {
      const std::size_t h = spec_.hidden_size;
      for (std::size_t j = h; j < 2 * h; ++j) p.b_x.data()[j] = static_cast<S>(spec_.forget_gate_bias);
    }
  }
}

template <typename S>
void Rnn<S>::register_params(ParamStore<S>& store, const std::string& prefix) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = prefix + ".layer" + std::to_string(l);
    store.add(p + ".w_x", layers_[l].w_x);
    store.add(p + ".w_h", layers_[l].w_h);
    store.add(p + ".b_x", layers_[l].b_x);
    if (layers_[l].b_h.defined()) store.add(p + ".b_h", layers_[l].b_h);
  }
}

template <typename S>
RnnState<S> Rnn<S>::zero_state(std::size_t batch) const {
  RnnState<S> s;
  s.h = Tensor<S>({batch, spec_.hidden_size});
  if (spec_.cell_kind == CellKind::kLstm) s.c = Tensor<S>({batch, spec_.hidden_size});
  return s;
}

template <typename S>
std::vector<Tensor<S>> Rnn<S>::forward(Tape<S>& tape, const Tensor<S>& x, bool training, Rng& rng) const {
  if (x.rank() != 3 || x.dim(1) != spec_.input_ch) {
    throw ShapeError("rnn expects [B, " + std::to_string(spec_.input_ch) + ", T], got " + shape_str(x.shape()));
  }
  const std::size_t batch = x.dim(0), len = x.dim(2);
  std::vector<RnnState<S>> states(layers_.size(), zero_state(batch));
  std::vector<Tensor<S>> outputs;
  outputs.reserve(len);
  for (std::size_t t = 0; t < len; ++t) {
    Tensor<S> inp = time_slice(tape, x, t);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (l > 0) inp = channel_dropout(tape, inp, spec_.dropout, training, rng);
      auto [out, next] = rnn_cell_step(tape, spec_.cell_kind, inp, states[l], layers_[l]);
      states[l] = std::move(next);
      inp = out;
    }
    outputs.push_back(inp);
  }
  return outputs;
}

template std::pair<Tensor<float>, RnnState<float>> rnn_cell_step(Tape<float>&, CellKind, const Tensor<float>&,
                                                                 const RnnState<float>&,
                                                                 const RnnCellParams<float>&);
template std::pair<Tensor<double>, RnnState<double>> rnn_cell_step(Tape<double>&, CellKind, const Tensor<double>&,
                                                                   const RnnState<double>&,
                                                                   const RnnCellParams<double>&);
template class Rnn<float>;
template class Rnn<double>;

}  // namespace tcnlab::nn

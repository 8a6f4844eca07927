#include "tcnlab/nn/model.hpp"

#include <cmath>

namespace tcnlab::nn {

ModelKind parse_model_kind(const std::string& s) {
  if (s == "tcn") return ModelKind::kTcn;
  if (s == "lstm") return ModelKind::kLstm;
  if (s == "gru") return ModelKind::kGru;
  if (s == "rnn") return ModelKind::kVanilla;
  throw ConfigError("unknown model kind '" + s + "' (expected tcn, lstm, gru or rnn)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTcn: return "tcn";
    case ModelKind::kLstm: return "lstm";
    case ModelKind::kGru: return "gru";
    case ModelKind::kVanilla: return "rnn";
  }
  return "?";
}

InputEncoding parse_encoding(const std::string& s) {
  if (s == "raw") return InputEncoding::kRaw;
  if (s == "embedding") return InputEncoding::kEmbedding;
  if (s == "onehot") return InputEncoding::kOneHot;
  throw ConfigError("unknown input encoding '" + s + "' (expected raw, embedding or onehot)");
}

std::string to_string(InputEncoding enc) {
  switch (enc) {
    case InputEncoding::kRaw: return "raw";
    case InputEncoding::kEmbedding: return "embedding";
    case InputEncoding::kOneHot: return "onehot";
  }
  return "?";
}

std::size_t encoded_width(const ModelSpec& spec, const ModelIo& io) {
  if (io.token_input) {
    if (spec.encoding == InputEncoding::kRaw) {
      throw ConfigError("token inputs need an embedding or onehot encoding");
    }
    if (spec.encoding == InputEncoding::kOneHot) return io.input_size;
    return spec.embed_dim ? spec.embed_dim : spec.hidden;
  }
  if (spec.encoding != InputEncoding::kRaw) {
    throw ConfigError("real-valued inputs only support the raw encoding");
  }
  return io.input_size;
}

namespace {

template <typename S>
Tensor<S> encode(Tape<S>& tape, const SequenceInput& input, InputEncoding enc, const Tensor<S>& table,
                 std::size_t vocab) {
  switch (enc) {
    case InputEncoding::kRaw: {
      if (input.is_tokens()) throw ShapeError("model expects real-valued input");
      if constexpr (std::is_same_v<S, float>) {
        return input.values;
      } else {
        return input.values.template cast<S>();
      }
    }
    case InputEncoding::kEmbedding:
      return embedding(tape, std::span<const std::int32_t>(input.tokens), input.batch, input.length, table);
    case InputEncoding::kOneHot:
      return one_hot<S>(input.tokens, input.batch, input.length, vocab);
  }
  throw ContractError("unknown encoding");
}

}  // namespace

template <typename S>
TcnSpec TcnModel<S>::tcn_spec(const ModelSpec& spec, const ModelIo& io) {
  TcnSpec t;
  t.input_ch = encoded_width(spec, io);
  t.level_channels.assign(spec.levels, spec.hidden);
  t.kernel_size = spec.kernel_size;
  t.dropout = spec.dropout;
  t.use_residual = spec.use_residual;
  t.use_gating = spec.use_gating;
  t.dilation_base = spec.dilation_base;
  return t;
}

template <typename S>
TcnModel<S>::TcnModel(const ModelSpec& spec, const ModelIo& io, Rng& init_rng)
    : io_(io), encoding_(spec.encoding), tcn_(tcn_spec(spec, io)), head_(spec.hidden, io.output_size) {
  if (io.token_input && encoding_ == InputEncoding::kEmbedding) {
    embed_ = Tensor<S>({io.input_size, encoded_width(spec, io)});
    fill_normal(embed_, init_rng, kTcnInitStd);
    this->params_.add("embed", embed_);
  }
  tcn_.init(init_rng);
  tcn_.register_params(this->params_, "tcn");
  fill_normal(head_.w, init_rng, kTcnInitStd);
  head_.register_params(this->params_, "head");
}

template <typename S>
Tensor<S> TcnModel<S>::forward(Tape<S>& tape, const SequenceInput& input, bool training, Rng& rng) const {
  Tensor<S> x = encode(tape, input, encoding_, embed_, io_.input_size);
  Tensor<S> y = tcn_.forward(tape, x, training, rng);
  if (io_.output == OutputMode::kLastStep) y = select_last_step(tape, y);
  return head_.forward(tape, y);
}

template <typename S>
RnnSpec RnnModel<S>::rnn_spec(const ModelSpec& spec, const ModelIo& io) {
  RnnSpec r;
  switch (spec.kind) {
    case ModelKind::kLstm: r.cell_kind = CellKind::kLstm; break;
    case ModelKind::kGru: r.cell_kind = CellKind::kGru; break;
    case ModelKind::kVanilla: r.cell_kind = CellKind::kVanilla; break;
    case ModelKind::kTcn: throw ConfigError("RnnModel built from a TCN spec");
  }
  r.input_ch = encoded_width(spec, io);
  r.hidden_size = spec.hidden;
  r.num_layers = spec.num_layers;
  r.dropout = spec.dropout;
  r.forget_gate_bias = spec.forget_gate_bias;
  return r;
}

template <typename S>
RnnModel<S>::RnnModel(const ModelSpec& spec, const ModelIo& io, Rng& init_rng)
    : io_(io), encoding_(spec.encoding), rnn_(rnn_spec(spec, io)), head_(spec.hidden, io.output_size) {
  if (io.token_input && encoding_ == InputEncoding::kEmbedding) {
    embed_ = Tensor<S>({io.input_size, encoded_width(spec, io)});
    fill_normal(embed_, init_rng, 1.0);
    this->params_.add("embed", embed_);
  }
  rnn_.init(init_rng);
  rnn_.register_params(this->params_, "rnn");
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
  fill_uniform(head_.w, init_rng, bound);
  fill_uniform(head_.b, init_rng, bound);
  head_.register_params(this->params_, "head");
}

template <typename S>
Tensor<S> RnnModel<S>::forward(Tape<S>& tape, const SequenceInput& input, bool training, Rng& rng) const {
  Tensor<S> x = encode(tape, input, encoding_, embed_, io_.input_size);
  std::vector<Tensor<S>> hs = rnn_.forward(tape, x, training, rng);
  if (io_.output == OutputMode::kLastStep) return head_.forward(tape, hs.back());
  Tensor<S> y = stack_time(tape, std::span<const Tensor<S>>(hs));
  return head_.forward(tape, y);
}

template <typename S>
std::unique_ptr<SequenceModel<S>> make_model(const ModelSpec& spec, const ModelIo& io, Rng& init_rng) {
  if (spec.kind == ModelKind::kTcn) return std::make_unique<TcnModel<S>>(spec, io, init_rng);
  return std::make_unique<RnnModel<S>>(spec, io, init_rng);
}

template class TcnModel<float>;
template class TcnModel<double>;
template class RnnModel<float>;
template class RnnModel<double>;
template std::unique_ptr<SequenceModel<float>> make_model(const ModelSpec&, const ModelIo&, Rng&);
template std::unique_ptr<SequenceModel<double>> make_model(const ModelSpec&, const ModelIo&, Rng&);

}  // namespace tcnlab::nn

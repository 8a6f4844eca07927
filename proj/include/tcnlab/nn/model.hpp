#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tcnlab/nn/heads.hpp"
#include "tcnlab/nn/params.hpp"
#include "tcnlab/nn/rnn.hpp"
#include "tcnlab/nn/tcn.hpp"

namespace tcnlab::nn {

enum class ModelKind { kTcn, kLstm, kGru, kVanilla };
enum class InputEncoding { kRaw, kEmbedding, kOneHot };
enum class OutputMode { kLastStep, kPerStep };

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind kind);
InputEncoding parse_encoding(const std::string& s);
std::string to_string(InputEncoding enc);

/// Model input: real-valued sequences [B, C, T] or token ids [B, T].
struct SequenceInput {
  Tensor<float> values;
  std::vector<std::int32_t> tokens;
  std::size_t batch = 0;
  std::size_t length = 0;

  bool is_tokens() const { return !values.defined(); }
};

/// How a task's data meets the model: input channels (or vocabulary size for
/// token inputs) and output width per prediction.
struct ModelIo {
  bool token_input = false;
  std::size_t input_size = 1;
  std::size_t output_size = 1;
  OutputMode output = OutputMode::kLastStep;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kTcn;
  InputEncoding encoding = InputEncoding::kRaw;
  std::size_t embed_dim = 0;  // 0: use hidden width
  // TCN
  std::size_t kernel_size = 2;
  std::size_t levels = 1;
  std::size_t hidden = 1;
  double dropout = 0.0;
  bool use_residual = true;
  bool use_gating = false;
  std::size_t dilation_base = 2;
  // RNN
  std::size_t num_layers = 1;
  double forget_gate_bias = 1.0;
};

template <typename S>
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  /// Logits: [B, out] for last-step tasks, [B, out, T] for per-step tasks.
  virtual Tensor<S> forward(Tape<S>& tape, const SequenceInput& input, bool training, Rng& rng) const = 0;

  ParamStore<S>& params() { return params_; }
  const ParamStore<S>& params() const { return params_; }

 protected:
  ParamStore<S> params_;
};

/// Encoder (raw / embedding / one-hot) -> TCN stack -> linear head.
template <typename S>
class TcnModel final : public SequenceModel<S> {
 public:
  TcnModel(const ModelSpec& spec, const ModelIo& io, Rng& init_rng);
  Tensor<S> forward(Tape<S>& tape, const SequenceInput& input, bool training, Rng& rng) const override;

  Tcn<S>& tcn() { return tcn_; }

 private:
  static TcnSpec tcn_spec(const ModelSpec& spec, const ModelIo& io);

  ModelIo io_;
  InputEncoding encoding_;
  Tensor<S> embed_;  // [V, E], embedding encoder only
  Tcn<S> tcn_;
  Linear<S> head_;
};

/// Encoder -> stacked LSTM / GRU / vanilla RNN -> linear head.
template <typename S>
class RnnModel final : public SequenceModel<S> {
 public:
  RnnModel(const ModelSpec& spec, const ModelIo& io, Rng& init_rng);
  Tensor<S> forward(Tape<S>& tape, const SequenceInput& input, bool training, Rng& rng) const override;

  Rnn<S>& rnn() { return rnn_; }

 private:
  static RnnSpec rnn_spec(const ModelSpec& spec, const ModelIo& io);

  ModelIo io_;
  InputEncoding encoding_;
  Tensor<S> embed_;
  Rnn<S> rnn_;
  Linear<S> head_;
};

template <typename S>
std::unique_ptr<SequenceModel<S>> make_model(const ModelSpec& spec, const ModelIo& io, Rng& init_rng);

/// Width of the encoder output fed into the sequence network.
std::size_t encoded_width(const ModelSpec& spec, const ModelIo& io);

}  // namespace tcnlab::nn

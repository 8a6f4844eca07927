#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "tcnlab/nn/model.hpp"
#include "tcnlab/train/metrics.hpp"
#include "tcnlab/verify.hpp"

namespace tcnlab::verify {

namespace {

using T = Tensor<double>;
using Fn = std::function<T(Tape<double>&)>;

T random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  T t(std::move(shape));
  for (double& v : t.data()) v = (2.0 * uniform01(rng) - 1.0) * scale;
  return t;
}

struct GradError {
  double scaled = 0;  // |a - n| / max(1, |n|), the pass criterion
  double strict = 0;  // |a - n| / max(|a|, |n|) over gradients above 1e-3
};

/// Worst error of d(f)/d(inputs) against central differences.
GradError max_rel_error(const std::vector<T>& inputs, const Fn& f) {
  for (const auto& x : inputs) {
    x.set_requires_grad(true);
    x.drop_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape<double> tape;
    T loss = f(tape);
    tape.backward(loss);
    for (const auto& x : inputs) {
      auto g = x.grad();
      analytic.emplace_back(g.begin(), g.end());
    }
  }
  auto eval = [&]() {
    Tape<double> tape(Tape<double>::Mode::kInference);
    return f(tape).item();
  };
  GradError worst;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto data = inputs[k].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + kGradcheckStep;
      const double up = eval();
      data[i] = saved - kGradcheckStep;
      const double down = eval();
      data[i] = saved;
      const double numeric = (up - down) / (2 * kGradcheckStep);
      const double a = analytic[k][i];
      const double diff = std::abs(a - numeric);
      worst.scaled = std::max(worst.scaled, diff / std::max(1.0, std::abs(numeric)));
      const double mag = std::max(std::abs(a), std::abs(numeric));
      if (mag > 1e-3) worst.strict = std::max(worst.strict, diff / mag);
    }
  }
  for (const auto& x : inputs) x.drop_grad();
  return worst;
}

/// Contracts an arbitrary output with fixed random weights so every output
/// element receives a distinct upstream gradient.
T project(Tape<double>& tape, const T& y, const T& weights) { return sum(tape, mul(tape, y, weights)); }

CheckResult check(const std::string& name, const std::vector<T>& inputs, const Fn& f) {
  const GradError err = max_rel_error(inputs, f);
  std::ostringstream d;
  d << "max_rel_error=" << err.scaled << " strict=" << err.strict;
  return {name, err.scaled < kGradcheckTol, d.str()};
}

CheckResult check_model(const std::string& name, const nn::ModelSpec& spec, const nn::ModelIo& io,
                        const nn::SequenceInput& input, const tasks::TaskBatch& batch, Rng& rng) {
  auto model = nn::make_model<double>(spec, io, rng);
  // Redraw parameters at unit-ish scale: gradients stay well above
  // finite-difference noise and no unit sits on a ReLU kink.
  for (auto& p : model->params())
    for (double& v : p.tensor.data()) v = 2.0 * uniform01(rng) - 1.0;
  std::vector<T> params = model->params().tensors();
  return check(name, params, [&](Tape<double>& tape) {
    Rng drop(7);
    T logits = model->forward(tape, input, spec.dropout > 0, drop);
    return train::task_loss(tape, logits, batch);
  });
}

}  // namespace

std::vector<CheckResult> gradcheck_suite() {
  std::vector<CheckResult> out;
  Rng rng = make_rng(11, Stream::kVerify);

  {
    T x = random_tensor({2, 3, 7}, rng), w = random_tensor({4, 3, 3}, rng), b = random_tensor({4}, rng);
    T r = random_tensor({2, 4, 7}, rng);
    for (std::size_t d : {1, 2, 3}) {
      out.push_back(check("conv1d_causal(d=" + std::to_string(d) + ")", {x, w, b},
                          [&, d](Tape<double>& t) { return project(t, conv1d_causal(t, x, w, b, d), r); }));
    }
    T nobias;
    out.push_back(check("conv1d_causal(no bias)", {x, w},
                        [&](Tape<double>& t) { return project(t, conv1d_causal(t, x, w, nobias, 2), r); }));
  }
  {
    T a = random_tensor({3, 5}, rng), b = random_tensor({5, 4}, rng), r = random_tensor({3, 4}, rng);
    out.push_back(check("matmul", {a, b}, [&](Tape<double>& t) { return project(t, matmul(t, a, b), r); }));
  }
  {
    T a = random_tensor({2, 3, 4}, rng), b = random_tensor({2, 3, 4}, rng), c = random_tensor({4}, rng);
    T r = random_tensor({2, 3, 4}, rng);
    const std::pair<const char*, BinaryOp> ops[] = {
        {"add", BinaryOp::kAdd}, {"sub", BinaryOp::kSub}, {"mul", BinaryOp::kMul}};
    for (const auto& [name, op] : ops) {
      out.push_back(check(name, {a, b}, [&, op = op](Tape<double>& t) {
        return project(t, elementwise(t, op, a, b), r);
      }));
      out.push_back(check(std::string(name) + "(broadcast)", {a, c}, [&, op = op](Tape<double>& t) {
        return project(t, elementwise(t, op, a, c), r);
      }));
    }
  }
  {
    T x = random_tensor({3, 6}, rng, 2.0), r = random_tensor({3, 6}, rng);
    for (double& v : x.data())
      if (std::abs(v) < 1e-3) v = 0.5;
    const std::pair<const char*, Activation> acts[] = {
        {"relu", Activation::kRelu}, {"sigmoid", Activation::kSigmoid}, {"tanh", Activation::kTanh}};
    for (const auto& [name, act] : acts) {
      out.push_back(check(name, {x}, [&, act = act](Tape<double>& t) { return project(t, activation(t, act, x), r); }));
    }
  }
  {
    T x = random_tensor({2, 3, 4}, rng), r = random_tensor({}, rng);
    out.push_back(check("sum", {x}, [&](Tape<double>& t) { return mul(t, sum(t, x), r); }));
    out.push_back(check("mean", {x}, [&](Tape<double>& t) { return mul(t, mean(t, x), r); }));
    T r2 = random_tensor({6, 4}, rng);
    out.push_back(check("reshape", {x}, [&](Tape<double>& t) { return project(t, reshape(t, x, {6, 4}), r2); }));
    T r3 = random_tensor({2, 3}, rng);
    out.push_back(check("time_slice", {x}, [&](Tape<double>& t) { return project(t, time_slice(t, x, 2), r3); }));
    T m = random_tensor({3, 8}, rng), r4 = random_tensor({3, 3}, rng);
    out.push_back(check("slice_cols", {m}, [&](Tape<double>& t) { return project(t, slice_cols(t, m, 2, 3), r4); }));
    T s0 = random_tensor({2, 3}, rng), s1 = random_tensor({2, 3}, rng), s2 = random_tensor({2, 3}, rng);
    T r5 = random_tensor({2, 3, 3}, rng);
    out.push_back(check("stack_time", {s0, s1, s2}, [&](Tape<double>& t) {
      std::vector<T> steps{s0, s1, s2};
      return project(t, stack_time(t, std::span<const T>(steps)), r5);
    }));
  }
  {
    T p = random_tensor({4, 3}, rng), y = random_tensor({4, 3}, rng);
    out.push_back(check("mse", {p, y}, [&](Tape<double>& t) { return mse(t, p, y); }));
    T logits2 = random_tensor({4, 5}, rng, 2.0);
    std::vector<std::int32_t> labels2{0, 3, 4, 1};
    out.push_back(check("cross_entropy([B,C])", {logits2},
                        [&](Tape<double>& t) { return cross_entropy(t, logits2, std::span<const std::int32_t>(labels2)); }));
    T logits3 = random_tensor({2, 4, 3}, rng, 2.0);
    std::vector<std::int32_t> labels3{0, 1, 3, 2, 2, 0};
    out.push_back(check("cross_entropy([B,C,T])", {logits3},
                        [&](Tape<double>& t) { return cross_entropy(t, logits3, std::span<const std::int32_t>(labels3)); }));
    T bl = random_tensor({2, 5, 3}, rng, 2.0);
    T bt({2, 5, 3});
    for (double& v : bt.data()) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;
    out.push_back(check("bernoulli_nll", {bl}, [&](Tape<double>& t) { return bernoulli_nll(t, bl, bt); }));
  }
  {
    T v = random_tensor({3, 2, 4}, rng), g = random_tensor({3}, rng), r = random_tensor({3, 2, 4}, rng);
    out.push_back(check("weight_norm", {v, g}, [&](Tape<double>& t) { return project(t, weight_norm(t, v, g), r); }));
  }
  {
    T x = random_tensor({3, 4, 5}, rng), r = random_tensor({3, 4, 5}, rng);
    out.push_back(check("channel_dropout(p=0.3)", {x}, [&](Tape<double>& t) {
      Rng drop(99);
      return project(t, channel_dropout(t, x, 0.3, true, drop), r);
    }));
  }
  {
    T x2 = random_tensor({3, 4}, rng), x3 = random_tensor({2, 4, 5}, rng);
    T w = random_tensor({6, 4}, rng), b = random_tensor({6}, rng);
    T r2 = random_tensor({3, 6}, rng), r3 = random_tensor({2, 6, 5}, rng);
    out.push_back(check("linear([B,in])", {x2, w, b},
                        [&](Tape<double>& t) { return project(t, nn::linear(t, x2, w, b), r2); }));
    out.push_back(check("linear([B,in,T])", {x3, w, b},
                        [&](Tape<double>& t) { return project(t, nn::linear(t, x3, w, b), r3); }));
    T table = random_tensor({5, 3}, rng), r4 = random_tensor({2, 3, 4}, rng);
    std::vector<std::int32_t> tokens{0, 4, 4, 2, 1, 3, 0, 0};
    out.push_back(check("embedding", {table}, [&](Tape<double>& t) {
      return project(t, nn::embedding(t, std::span<const std::int32_t>(tokens), 2, 4, table), r4);
    }));
  }

  // Composite blocks and stacks.
  auto block_check = [&](const std::string& name, std::size_t in, std::size_t outc, bool gating, double dropout) {
    nn::TemporalBlock<double> block(in, outc, 3, 2, dropout, true, gating);
    block.init(rng, 0.5);
    nn::ParamStore<double> store;
    block.register_params(store, "b");
    for (auto& p : store)
      for (double& v : p.tensor.data()) v += 0.1 * (2.0 * uniform01(rng) - 1.0);
    T x = random_tensor({2, in, 5}, rng), r = random_tensor({2, outc, 5}, rng);
    std::vector<T> inputs = store.tensors();
    inputs.push_back(x);
    out.push_back(check(name, inputs, [&](Tape<double>& t) {
      Rng drop(5);
      T y = gating ? nn::glu_block_forward(t, x, block, dropout > 0, drop)
                   : nn::temporal_block_forward(t, x, block, dropout > 0, drop);
      return project(t, y, r);
    }));
  };
  block_check("temporal_block(identity skip)", 4, 4, false, 0.0);
  block_check("temporal_block(1x1 projection)", 3, 5, false, 0.0);
  block_check("temporal_block(dropout)", 4, 4, false, 0.25);
  block_check("glu_block", 3, 4, true, 0.0);
  {
    nn::TcnSpec spec;
    spec.input_ch = 2;
    spec.level_channels = {5, 5, 4};
    spec.kernel_size = 2;
    nn::Tcn<double> tcn(spec);
    tcn.init(rng, 0.5);
    nn::ParamStore<double> store;
    tcn.register_params(store, "tcn");
    for (auto& p : store)
      for (double& v : p.tensor.data()) v += 0.1 * (2.0 * uniform01(rng) - 1.0);
    T x = random_tensor({2, 2, 5}, rng), r = random_tensor({2, 4, 5}, rng);
    std::vector<T> inputs = store.tensors();
    inputs.push_back(x);
    out.push_back(check("tcn_stack(3 levels)", inputs, [&](Tape<double>& t) {
      Rng drop(1);
      return project(t, nn::tcn_forward(t, x, tcn, false, drop), r);
    }));
  }
  for (auto kind : {nn::CellKind::kLstm, nn::CellKind::kGru, nn::CellKind::kVanilla}) {
    nn::RnnSpec spec;
    spec.cell_kind = kind;
    spec.input_ch = 3;
    spec.hidden_size = 6;
    spec.num_layers = 2;
    nn::Rnn<double> rnn(spec);
    rnn.init(rng);
    nn::ParamStore<double> store;
    rnn.register_params(store, "rnn");
    T x = random_tensor({2, 3, 5}, rng), r = random_tensor({2, 6, 5}, rng);
    std::vector<T> inputs = store.tensors();
    inputs.push_back(x);
    const char* label = kind == nn::CellKind::kLstm ? "lstm" : kind == nn::CellKind::kGru ? "gru" : "vanilla_rnn";
    out.push_back(check(std::string(label) + "(2 layers, 5 steps)", inputs, [&](Tape<double>& t) {
      Rng drop(1);
      auto hs = rnn.forward(t, x, false, drop);
      return project(t, stack_time(t, std::span<const T>(hs)), r);
    }));
  }

  // End-to-end models with their task losses.
  {
    tasks::TaskBatch adding = tasks::gen_adding(2, 5, 3);
    nn::ModelIo io{false, 2, 1, nn::OutputMode::kLastStep};
    nn::ModelSpec tcn;
    tcn.kind = nn::ModelKind::kTcn;
    tcn.kernel_size = 2;
    tcn.levels = 2;
    tcn.hidden = 4;
    out.push_back(check_model("model(tcn, adding mse)", tcn, io, adding.input, adding, rng));
    nn::ModelSpec lstm = tcn;
    lstm.kind = nn::ModelKind::kLstm;
    lstm.num_layers = 1;
    out.push_back(check_model("model(lstm, adding mse)", lstm, io, adding.input, adding, rng));
  }
  {
    tasks::TaskBatch copy = tasks::gen_copy_memory(1, 2, 4);
    nn::ModelIo io{true, 10, 10, nn::OutputMode::kPerStep};
    nn::ModelSpec tcn;
    tcn.kind = nn::ModelKind::kTcn;
    tcn.encoding = nn::InputEncoding::kEmbedding;
    tcn.kernel_size = 3;
    tcn.levels = 2;
    tcn.hidden = 4;
    tcn.dropout = 0.2;
    out.push_back(check_model("model(tcn+embedding+dropout, copy ce)", tcn, io, copy.input, copy, rng));
    nn::ModelSpec gru = tcn;
    gru.kind = nn::ModelKind::kGru;
    gru.encoding = nn::InputEncoding::kOneHot;
    gru.dropout = 0;
    out.push_back(check_model("model(gru+onehot, copy ce)", gru, io, copy.input, copy, rng));
  }
  return out;
}

}  // namespace tcnlab::verify

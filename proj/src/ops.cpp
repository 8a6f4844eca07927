#include "tcnlab/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <sstream>

namespace tcnlab {

namespace {

std::atomic<bool> g_finite_checks{false};

template <typename S>
void check_finite(const Tensor<S>& t, const char* op) {
  if (g_finite_checks.load(std::memory_order_relaxed) && !t.all_finite()) {
    throw NumericalError(std::string("non-finite value produced by ") + op);
  }
}

template <typename S>
S stable_sigmoid(S x) {
  if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
  const S e = std::exp(x);
  return e / (S(1) + e);
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

void set_finite_checks(bool on) { g_finite_checks.store(on); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

template <typename S>
Tensor<S> conv1d_causal(Tape<S>& tape, const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias,
                        std::size_t dilation) {
  require(x.rank() == 3, "conv1d_causal: x must be [B, Cin, T], got " + shape_str(x.shape()));
  require(w.rank() == 3, "conv1d_causal: w must be [Cout, Cin, k], got " + shape_str(w.shape()));
  require(x.dim(1) == w.dim(1), "conv1d_causal: input channels " + std::to_string(x.dim(1)) +
                                    " do not match filter channels " + std::to_string(w.dim(1)));
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  if (dilation < 1) throw DomainError("conv1d_causal: dilation must be >= 1");
  if (k < 1) throw DomainError("conv1d_causal: kernel size must be >= 1");
  const bool has_bias = bias.defined();
  if (has_bias) {
    require(bias.rank() == 1 && bias.dim(0) == cout,
            "conv1d_causal: bias must be [Cout], got " + shape_str(bias.shape()));
  }

  Tensor<S> out({batch, cout, len});
  const S* xd = x.ptr();
  const S* wd = w.ptr();
  S* od = out.ptr();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      S* __restrict orow = od + (b * cout + o) * len;
      if (has_bias) std::fill(orow, orow + len, bias.data()[o]);
      for (std::size_t c = 0; c < cin; ++c) {
        const S* __restrict xrow = xd + (b * cin + c) * len;
        const S* wrow = wd + (o * cin + c) * k;
        for (std::size_t i = 0; i < k; ++i) {
          const std::size_t shift = dilation * i;
          if (shift >= len) break;
          const S wv = wrow[i];
          for (std::size_t s = shift; s < len; ++s) orow[s] += wv * xrow[s - shift];
        }
      }
    }
  }
  check_finite(out, "conv1d_causal");

  if (tape.needs_grad({&x, &w, &bias})) {
    tape.record({x, w, bias}, out, [x, w, bias, out, dilation, batch, cin, cout, len, k]() mutable {
      const S* go = out.grad().data();
      const bool gx_on = x.requires_grad();
      const bool gw_on = w.requires_grad();
      S* gx = gx_on ? x.grad().data() : nullptr;
      S* gw = gw_on ? w.grad().data() : nullptr;
      const S* xd = x.ptr();
      const S* wd = w.ptr();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < cout; ++o) {
          const S* __restrict grow = go + (b * cout + o) * len;
          for (std::size_t c = 0; c < cin; ++c) {
            const S* __restrict xrow = xd + (b * cin + c) * len;
            const S* wrow = wd + (o * cin + c) * k;
            for (std::size_t i = 0; i < k; ++i) {
              const std::size_t shift = dilation * i;
              if (shift >= len) break;
              if (gx_on) {
                S* __restrict gxrow = gx + (b * cin + c) * len;
                const S wv = wrow[i];
                for (std::size_t s = shift; s < len; ++s) gxrow[s - shift] += wv * grow[s];
              }
              if (gw_on) {
                S acc = 0;
                for (std::size_t s = shift; s < len; ++s) acc += grow[s] * xrow[s - shift];
                gw[(o * cin + c) * k + i] += acc;
              }
            }
          }
        }
      }
      if (bias.defined() && bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t o = 0; o < cout; ++o) {
            const S* grow = go + (b * cout + o) * len;
            S acc = 0;
            for (std::size_t s = 0; s < len; ++s) acc += grow[s];
            gb[o] += acc;
          }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> matmul(Tape<S>& tape, const Tensor<S>& a, const Tensor<S>& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul: operands must be matrices, got " +
                                               shape_str(a.shape()) + " and " + shape_str(b.shape()));
  require(a.dim(1) == b.dim(0),
          "matmul: inner dimensions differ: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), p = a.dim(1), q = b.dim(1);
  Tensor<S> out({m, q});
  const S* ad = a.ptr();
  const S* bd = b.ptr();
  S* od = out.ptr();
  for (std::size_t i = 0; i < m; ++i) {
    S* __restrict orow = od + i * q;
    for (std::size_t kk = 0; kk < p; ++kk) {
      const S av = ad[i * p + kk];
      const S* __restrict brow = bd + kk * q;
      for (std::size_t j = 0; j < q; ++j) orow[j] += av * brow[j];
    }
  }
  check_finite(out, "matmul");

  if (tape.needs_grad({&a, &b})) {
    tape.record({a, b}, out, [a, b, out, m, p, q]() mutable {
      const S* go = out.grad().data();
      const S* ad = a.ptr();
      const S* bd = b.ptr();
      if (a.requires_grad()) {
        S* ga = a.grad().data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t kk = 0; kk < p; ++kk) {
            const S* grow = go + i * q;
            const S* brow = bd + kk * q;
            S acc = 0;
            for (std::size_t j = 0; j < q; ++j) acc += grow[j] * brow[j];
            ga[i * p + kk] += acc;
          }
      }
      if (b.requires_grad()) {
        S* gb = b.grad().data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t kk = 0; kk < p; ++kk) {
            const S av = ad[i * p + kk];
            const S* __restrict grow = go + i * q;
            S* __restrict gbrow = gb + kk * q;
            for (std::size_t j = 0; j < q; ++j) gbrow[j] += av * grow[j];
          }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> elementwise(Tape<S>& tape, BinaryOp op, const Tensor<S>& a, const Tensor<S>& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  bool ok = bs.size() <= as.size() && std::equal(bs.rbegin(), bs.rend(), as.rbegin());
  if (!ok) {
    throw ShapeError("elementwise: cannot broadcast " + shape_str(bs) + " onto " + shape_str(as));
  }
  const std::size_t inner = b.numel();
  const std::size_t outer = inner == 0 ? 0 : a.numel() / inner;
  Tensor<S> out(as);
  const S* ad = a.ptr();
  const S* bd = b.ptr();
  S* od = out.ptr();
  for (std::size_t r = 0; r < outer; ++r) {
    const S* arow = ad + r * inner;
    S* orow = od + r * inner;
    switch (op) {
      case BinaryOp::kAdd:
        for (std::size_t j = 0; j < inner; ++j) orow[j] = arow[j] + bd[j];
        break;
      case BinaryOp::kSub:
        for (std::size_t j = 0; j < inner; ++j) orow[j] = arow[j] - bd[j];
        break;
      case BinaryOp::kMul:
        for (std::size_t j = 0; j < inner; ++j) orow[j] = arow[j] * bd[j];
        break;
    }
  }
  check_finite(out, "elementwise");

  if (tape.needs_grad({&a, &b})) {
    tape.record({a, b}, out, [a, b, out, op, inner, outer]() mutable {
      const S* go = out.grad().data();
      if (a.requires_grad()) {
        S* ga = a.grad().data();
        const S* bd = b.ptr();
        for (std::size_t r = 0; r < outer; ++r)
          for (std::size_t j = 0; j < inner; ++j) {
            const std::size_t idx = r * inner + j;
            ga[idx] += op == BinaryOp::kMul ? go[idx] * bd[j] : go[idx];
          }
      }
      if (b.requires_grad()) {
        S* gb = b.grad().data();
        const S* ad = a.ptr();
        for (std::size_t r = 0; r < outer; ++r)
          for (std::size_t j = 0; j < inner; ++j) {
            const std::size_t idx = r * inner + j;
            switch (op) {
              case BinaryOp::kAdd: gb[j] += go[idx]; break;
              case BinaryOp::kSub: gb[j] -= go[idx]; break;
              case BinaryOp::kMul: gb[j] += go[idx] * ad[idx]; break;
            }
          }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> activation(Tape<S>& tape, Activation kind, const Tensor<S>& x) {
  Tensor<S> out(x.shape());
  const S* xd = x.ptr();
  S* od = out.ptr();
  const std::size_t n = x.numel();
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) od[i] = xd[i] > S(0) ? xd[i] : S(0);
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) od[i] = stable_sigmoid(xd[i]);
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) od[i] = std::tanh(xd[i]);
      break;
  }
  check_finite(out, "activation");

  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out, kind, n]() mutable {
      const S* go = out.grad().data();
      const S* y = out.ptr();
      const S* xd = x.ptr();
      S* gx = x.grad().data();
      switch (kind) {
        case Activation::kRelu:
          for (std::size_t i = 0; i < n; ++i)
            if (xd[i] > S(0)) gx[i] += go[i];
          break;
        case Activation::kSigmoid:
          for (std::size_t i = 0; i < n; ++i) gx[i] += go[i] * y[i] * (S(1) - y[i]);
          break;
        case Activation::kTanh:
          for (std::size_t i = 0; i < n; ++i) gx[i] += go[i] * (S(1) - y[i] * y[i]);
          break;
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> sum(Tape<S>& tape, const Tensor<S>& x) {
  S acc = 0;
  for (S v : x.data()) acc += v;
  Tensor<S> out = Tensor<S>::scalar(acc);
  check_finite(out, "sum");
  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out]() mutable {
      const S g = out.grad()[0];
      for (S& v : x.grad()) v += g;
    });
  }
  return out;
}

template <typename S>
Tensor<S> mean(Tape<S>& tape, const Tensor<S>& x) {
  if (x.numel() == 0) throw DomainError("mean of an empty tensor");
  S acc = 0;
  for (S v : x.data()) acc += v;
  const S inv = S(1) / static_cast<S>(x.numel());
  Tensor<S> out = Tensor<S>::scalar(acc * inv);
  check_finite(out, "mean");
  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out, inv]() mutable {
      const S g = out.grad()[0] * inv;
      for (S& v : x.grad()) v += g;
    });
  }
  return out;
}

template <typename S>
Tensor<S> reshape(Tape<S>& tape, const Tensor<S>& x, Shape shape) {
  require(shape_numel(shape) == x.numel(),
          "reshape: " + shape_str(x.shape()) + " has a different element count than " + shape_str(shape));
  Tensor<S> out(std::move(shape), std::vector<S>(x.data().begin(), x.data().end()));
  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out]() mutable {
      auto go = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
    });
  }
  return out;
}

template <typename S>
Tensor<S> slice_cols(Tape<S>& tape, const Tensor<S>& x, std::size_t start, std::size_t len) {
  require(x.rank() == 2, "slice_cols: expected a matrix, got " + shape_str(x.shape()));
  require(start + len <= x.dim(1), "slice_cols: columns [" + std::to_string(start) + ", " +
                                       std::to_string(start + len) + ") out of range for " +
                                       shape_str(x.shape()));
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor<S> out({rows, len});
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x.ptr() + r * cols + start, len, out.ptr() + r * len);
  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out, start, len, rows, cols]() mutable {
      const S* go = out.grad().data();
      S* gx = x.grad().data();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < len; ++j) gx[r * cols + start + j] += go[r * len + j];
    });
  }
  return out;
}

template <typename S>
Tensor<S> time_slice(Tape<S>& tape, const Tensor<S>& x, std::size_t t) {
  require(x.rank() == 3, "time_slice: expected [B, C, T], got " + shape_str(x.shape()));
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  if (t >= len) throw DomainError("time_slice: step " + std::to_string(t) + " out of range");
  Tensor<S> out({x.dim(0), x.dim(1)});
  for (std::size_t r = 0; r < rows; ++r) out.ptr()[r] = x.ptr()[r * len + t];
  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out, rows, len, t]() mutable {
      const S* go = out.grad().data();
      S* gx = x.grad().data();
      for (std::size_t r = 0; r < rows; ++r) gx[r * len + t] += go[r];
    });
  }
  return out;
}

template <typename S>
Tensor<S> stack_time(Tape<S>& tape, std::span<const Tensor<S>> steps) {
  if (steps.empty()) throw DomainError("stack_time: no steps");
  const Shape& s0 = steps[0].shape();
  require(s0.size() == 2, "stack_time: steps must be [B, C], got " + shape_str(s0));
  for (const auto& s : steps)
    require(s.shape() == s0, "stack_time: inconsistent step shape " + shape_str(s.shape()));
  const std::size_t rows = s0[0] * s0[1], len = steps.size();
  Tensor<S> out({s0[0], s0[1], len});
  for (std::size_t t = 0; t < len; ++t) {
    const S* src = steps[t].ptr();
    for (std::size_t r = 0; r < rows; ++r) out.ptr()[r * len + t] = src[r];
  }
  bool any = false;
  for (const auto& s : steps) any = any || s.requires_grad();
  if (tape.recording() && any) {
    std::vector<Tensor<S>> inputs(steps.begin(), steps.end());
    tape.record(inputs, out, [inputs, out, rows, len]() mutable {
      const S* go = out.grad().data();
      for (std::size_t t = 0; t < len; ++t) {
        if (!inputs[t].requires_grad()) continue;
        S* g = inputs[t].grad().data();
        for (std::size_t r = 0; r < rows; ++r) g[r] += go[r * len + t];
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> mse(Tape<S>& tape, const Tensor<S>& pred, const Tensor<S>& target) {
  require(pred.shape() == target.shape(),
          "mse: shape " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
  const std::size_t n = pred.numel();
  if (n == 0) throw DomainError("mse of empty tensors");
  S acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const S d = pred.data()[i] - target.data()[i];
    acc += d * d;
  }
  Tensor<S> out = Tensor<S>::scalar(acc / static_cast<S>(n));
  check_finite(out, "mse");
  if (tape.needs_grad({&pred, &target})) {
    tape.record({pred, target}, out, [pred, target, out, n]() mutable {
      const S scale = out.grad()[0] * S(2) / static_cast<S>(n);
      const bool gp = pred.requires_grad(), gt = target.requires_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const S d = (pred.data()[i] - target.data()[i]) * scale;
        if (gp) pred.grad()[i] += d;
        if (gt) target.grad()[i] -= d;
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> cross_entropy(Tape<S>& tape, const Tensor<S>& logits, std::span<const std::int32_t> labels) {
  require(logits.rank() == 2 || logits.rank() == 3,
          "cross_entropy: logits must be [B, C] or [B, C, T], got " + shape_str(logits.shape()));
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  const std::size_t len = logits.rank() == 3 ? logits.dim(2) : 1;
  require(labels.size() == batch * len, "cross_entropy: expected " + std::to_string(batch * len) +
                                            " labels, got " + std::to_string(labels.size()));
  const std::size_t n = batch * len;
  if (n == 0) throw DomainError("cross_entropy over zero positions");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw DomainError("cross_entropy: label " + std::to_string(labels[i]) + " outside [0, " +
                        std::to_string(classes) + ")");
    }
  }
  // softmax probabilities, kept for the backward pass
  auto probs = std::make_shared<std::vector<S>>(logits.numel());
  const S* ld = logits.ptr();
  double total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t base = b * classes * len + t;
      S mx = ld[base];
      for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, ld[base + c * len]);
      S z = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        const S e = std::exp(ld[base + c * len] - mx);
        (*probs)[base + c * len] = e;
        z += e;
      }
      for (std::size_t c = 0; c < classes; ++c) (*probs)[base + c * len] /= z;
      const std::size_t y = static_cast<std::size_t>(labels[b * len + t]);
      total += static_cast<double>(mx + std::log(z) - ld[base + y * len]);
    }
  }
  Tensor<S> out = Tensor<S>::scalar(static_cast<S>(total / static_cast<double>(n)));
  check_finite(out, "cross_entropy");
  if (tape.needs_grad({&logits})) {
    std::vector<std::int32_t> lab(labels.begin(), labels.end());
    tape.record({logits}, out, [logits, out, probs, lab = std::move(lab), batch, classes, len, n]() mutable {
      const S scale = out.grad()[0] / static_cast<S>(n);
      S* gl = logits.grad().data();
      const S* p = probs->data();
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t) {
          const std::size_t base = b * classes * len + t;
          const std::size_t y = static_cast<std::size_t>(lab[b * len + t]);
          for (std::size_t c = 0; c < classes; ++c) {
            const std::size_t idx = base + c * len;
            gl[idx] += scale * (p[idx] - (c == y ? S(1) : S(0)));
          }
        }
    });
  }
  return out;
}

template <typename S>
Tensor<S> bernoulli_nll(Tape<S>& tape, const Tensor<S>& logits, const Tensor<S>& targets) {
  require(logits.rank() == 3, "bernoulli_nll: logits must be [B, K, T], got " + shape_str(logits.shape()));
  require(logits.shape() == targets.shape(), "bernoulli_nll: shape " + shape_str(logits.shape()) + " vs " +
                                                 shape_str(targets.shape()));
  const std::size_t frames = logits.dim(0) * logits.dim(2);
  if (frames == 0) throw DomainError("bernoulli_nll over zero frames");
  const S* l = logits.ptr();
  const S* y = targets.ptr();
  double total = 0;
  for (std::size_t i = 0; i < logits.numel(); ++i) {
    // -[y log s(l) + (1-y) log(1 - s(l))] = max(l, 0) - y l + log(1 + e^{-|l|})
    total += static_cast<double>(std::max(l[i], S(0)) - y[i] * l[i] + std::log1p(std::exp(-std::abs(l[i]))));
  }
  Tensor<S> out = Tensor<S>::scalar(static_cast<S>(total / static_cast<double>(frames)));
  check_finite(out, "bernoulli_nll");
  if (tape.needs_grad({&logits})) {
    tape.record({logits}, out, [logits, targets, out, frames]() mutable {
      const S scale = out.grad()[0] / static_cast<S>(frames);
      S* gl = logits.grad().data();
      const S* l = logits.ptr();
      const S* y = targets.ptr();
      for (std::size_t i = 0; i < logits.numel(); ++i) gl[i] += scale * (stable_sigmoid(l[i]) - y[i]);
    });
  }
  return out;
}

template <typename S>
Tensor<S> weight_norm(Tape<S>& tape, const Tensor<S>& v, const Tensor<S>& g) {
  require(v.rank() >= 1, "weight_norm: v must have an output dimension");
  const std::size_t outs = v.dim(0);
  require(g.rank() == 1 && g.dim(0) == outs,
          "weight_norm: g must be [" + std::to_string(outs) + "], got " + shape_str(g.shape()));
  const std::size_t inner = outs == 0 ? 0 : v.numel() / outs;
  auto norms = std::make_shared<std::vector<S>>(outs);
  Tensor<S> out(v.shape());
  for (std::size_t o = 0; o < outs; ++o) {
    const S* vrow = v.ptr() + o * inner;
    S sq = 0;
    for (std::size_t j = 0; j < inner; ++j) sq += vrow[j] * vrow[j];
    const S nrm = std::sqrt(sq);
    if (!(nrm >= S(1e-12))) {
      throw DomainError("weight_norm: direction of output channel " + std::to_string(o) +
                        " has norm below 1e-12");
    }
    (*norms)[o] = nrm;
    const S scale = g.data()[o] / nrm;
    S* orow = out.ptr() + o * inner;
    for (std::size_t j = 0; j < inner; ++j) orow[j] = scale * vrow[j];
  }
  check_finite(out, "weight_norm");
  if (tape.needs_grad({&v, &g})) {
    tape.record({v, g}, out, [v, g, out, norms, outs, inner]() mutable {
      const S* gw = out.grad().data();
      for (std::size_t o = 0; o < outs; ++o) {
        const S* vrow = v.ptr() + o * inner;
        const S* grow = gw + o * inner;
        const S nrm = (*norms)[o];
        S dot = 0;
        for (std::size_t j = 0; j < inner; ++j) dot += grow[j] * vrow[j];
        if (g.requires_grad()) g.grad()[o] += dot / nrm;
        if (v.requires_grad()) {
          const S gain = g.data()[o] / nrm;
          const S radial = dot / (nrm * nrm);
          S* gv = v.grad().data() + o * inner;
          for (std::size_t j = 0; j < inner; ++j) gv[j] += gain * (grow[j] - vrow[j] * radial);
        }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> channel_dropout(Tape<S>& tape, const Tensor<S>& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("channel_dropout: probability " + std::to_string(p) + " outside [0, 1)");
  }
  require(x.rank() == 2 || x.rank() == 3,
          "channel_dropout: expected [B, C, T] or [B, C], got " + shape_str(x.shape()));
  if (!training || p == 0.0) return x;
  const std::size_t rows = x.dim(0) * x.dim(1);
  const std::size_t len = x.rank() == 3 ? x.dim(2) : 1;
  const S keep_scale = static_cast<S>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<S>>(rows);
  for (auto& m : *mask) m = uniform01(rng) < p ? S(0) : keep_scale;
  Tensor<S> out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const S m = (*mask)[r];
    for (std::size_t t = 0; t < len; ++t) out.ptr()[r * len + t] = x.ptr()[r * len + t] * m;
  }
  if (tape.needs_grad({&x})) {
    tape.record({x}, out, [x, out, mask, rows, len]() mutable {
      const S* go = out.grad().data();
      S* gx = x.grad().data();
      for (std::size_t r = 0; r < rows; ++r) {
        const S m = (*mask)[r];
        for (std::size_t t = 0; t < len; ++t) gx[r * len + t] += go[r * len + t] * m;
      }
    });
  }
  return out;
}

template <typename S>
S grad_global_norm(std::span<const Tensor<S>> params) {
  double sq = 0;
  for (const auto& p : params) {
    if (!p.has_grad()) continue;
    for (S g : p.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  return static_cast<S>(std::sqrt(sq));
}

template <typename S>
S clip_grad_global_norm(std::span<Tensor<S>> params, S max_norm) {
  const S norm = grad_global_norm(std::span<const Tensor<S>>(params.data(), params.size()));
  if (!(norm > max_norm)) return S(1);
  const S scale = max_norm / norm;
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    for (S& g : p.grad()) g *= scale;
  }
  return scale;
}

#define TCNLAB_INSTANTIATE_OPS(S)                                                                        \
  template Tensor<S> conv1d_causal(Tape<S>&, const Tensor<S>&, const Tensor<S>&, const Tensor<S>&,      \
                                   std::size_t);                                                         \
  template Tensor<S> matmul(Tape<S>&, const Tensor<S>&, const Tensor<S>&);                              \
  template Tensor<S> elementwise(Tape<S>&, BinaryOp, const Tensor<S>&, const Tensor<S>&);               \
  template Tensor<S> activation(Tape<S>&, Activation, const Tensor<S>&);                                \
  template Tensor<S> sum(Tape<S>&, const Tensor<S>&);                                                   \
  template Tensor<S> mean(Tape<S>&, const Tensor<S>&);                                                  \
  template Tensor<S> reshape(Tape<S>&, const Tensor<S>&, Shape);                                        \
  template Tensor<S> slice_cols(Tape<S>&, const Tensor<S>&, std::size_t, std::size_t);                  \
  template Tensor<S> time_slice(Tape<S>&, const Tensor<S>&, std::size_t);                               \
  template Tensor<S> stack_time(Tape<S>&, std::span<const Tensor<S>>);                                  \
  template Tensor<S> mse(Tape<S>&, const Tensor<S>&, const Tensor<S>&);                                 \
  template Tensor<S> cross_entropy(Tape<S>&, const Tensor<S>&, std::span<const std::int32_t>);          \
  template Tensor<S> bernoulli_nll(Tape<S>&, const Tensor<S>&, const Tensor<S>&);                       \
  template Tensor<S> weight_norm(Tape<S>&, const Tensor<S>&, const Tensor<S>&);                         \
  template Tensor<S> channel_dropout(Tape<S>&, const Tensor<S>&, double, bool, Rng&);                   \
  template S grad_global_norm(std::span<const Tensor<S>>);                                              \
  template S clip_grad_global_norm(std::span<Tensor<S>>, S);

TCNLAB_INSTANTIATE_OPS(float)
TCNLAB_INSTANTIATE_OPS(double)

}  // namespace tcnlab

#include "tcnlab/nn/heads.hpp"

namespace tcnlab::nn {

template <typename S>
Tensor<S> linear(Tape<S>& tape, const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  if (w.rank() != 2 || b.rank() != 1 || b.dim(0) != w.dim(0)) {
    throw ShapeError("linear: weight " + shape_str(w.shape()) + " and bias " + shape_str(b.shape()) +
                     " do not form an [out, in] / [out] pair");
  }
  if ((x.rank() != 2 && x.rank() != 3) || x.dim(1) != w.dim(1)) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " does not match weight " + shape_str(w.shape()));
  }
  const std::size_t batch = x.dim(0), in = w.dim(1), out_dim = w.dim(0);
  const std::size_t len = x.rank() == 3 ? x.dim(2) : 1;
  Shape out_shape = x.rank() == 3 ? Shape{batch, out_dim, len} : Shape{batch, out_dim};
  Tensor<S> out(out_shape);
  const S* xd = x.ptr();
  const S* wd = w.ptr();
  S* od = out.ptr();
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t o = 0; o < out_dim; ++o) {
      S* __restrict orow = od + (n * out_dim + o) * len;
      std::fill(orow, orow + len, b.data()[o]);
      for (std::size_t i = 0; i < in; ++i) {
        const S wv = wd[o * in + i];
        const S* __restrict xrow = xd + (n * in + i) * len;
        for (std::size_t t = 0; t < len; ++t) orow[t] += wv * xrow[t];
      }
    }
  if (tape.needs_grad({&x, &w, &b})) {
    tape.record({x, w, b}, out, [x, w, b, out, batch, in, out_dim, len]() mutable {
      const S* go = out.grad().data();
      const S* xd = x.ptr();
      const S* wd = w.ptr();
      S* gx = x.requires_grad() ? x.grad().data() : nullptr;
      S* gw = w.requires_grad() ? w.grad().data() : nullptr;
      S* gb = b.requires_grad() ? b.grad().data() : nullptr;
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t o = 0; o < out_dim; ++o) {
          const S* grow = go + (n * out_dim + o) * len;
          if (gb) {
            S acc = 0;
            for (std::size_t t = 0; t < len; ++t) acc += grow[t];
            gb[o] += acc;
          }
          for (std::size_t i = 0; i < in; ++i) {
            const S* xrow = xd + (n * in + i) * len;
            if (gw) {
              S acc = 0;
              for (std::size_t t = 0; t < len; ++t) acc += grow[t] * xrow[t];
              gw[o * in + i] += acc;
            }
            if (gx) {
              S* gxrow = gx + (n * in + i) * len;
              const S wv = wd[o * in + i];
              for (std::size_t t = 0; t < len; ++t) gxrow[t] += wv * grow[t];
            }
          }
        }
    });
  }
  return out;
}

template <typename S>
Tensor<S> embedding(Tape<S>& tape, std::span<const std::int32_t> tokens, std::size_t batch, std::size_t len,
                    const Tensor<S>& table) {
  if (table.rank() != 2) throw ShapeError("embedding: table must be [V, E], got " + shape_str(table.shape()));
  if (tokens.size() != batch * len) {
    throw ShapeError("embedding: expected " + std::to_string(batch * len) + " tokens, got " +
                     std::to_string(tokens.size()));
  }
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  for (auto tok : tokens) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= vocab) {
      throw DomainError("embedding: token " + std::to_string(tok) + " outside vocabulary of " +
                        std::to_string(vocab));
    }
  }
  Tensor<S> out({batch, width, len});
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t t = 0; t < len; ++t) {
      const S* row = table.ptr() + static_cast<std::size_t>(tokens[n * len + t]) * width;
      for (std::size_t e = 0; e < width; ++e) out.ptr()[(n * width + e) * len + t] = row[e];
    }
  if (tape.needs_grad({&table})) {
    std::vector<std::int32_t> toks(tokens.begin(), tokens.end());
    tape.record({table}, out, [table, out, toks = std::move(toks), batch, len, width]() mutable {
      const S* go = out.grad().data();
      S* gt = table.grad().data();
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t t = 0; t < len; ++t) {
          S* row = gt + static_cast<std::size_t>(toks[n * len + t]) * width;
          for (std::size_t e = 0; e < width; ++e) row[e] += go[(n * width + e) * len + t];
        }
    });
  }
  return out;
}

template <typename S>
Tensor<S> one_hot(std::span<const std::int32_t> tokens, std::size_t batch, std::size_t len, std::size_t classes) {
  if (tokens.size() != batch * len) throw ShapeError("one_hot: token count does not match [B, T]");
  Tensor<S> out({batch, classes, len});
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t t = 0; t < len; ++t) {
      const auto tok = tokens[n * len + t];
      if (tok < 0 || static_cast<std::size_t>(tok) >= classes) {
        throw DomainError("one_hot: token " + std::to_string(tok) + " outside [0, " + std::to_string(classes) +
                          ")");
      }
      out.ptr()[(n * classes + static_cast<std::size_t>(tok)) * len + t] = S(1);
    }
  return out;
}

#define TCNLAB_INSTANTIATE_HEADS(S)                                                                        \
  template Tensor<S> linear(Tape<S>&, const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);              \
  template Tensor<S> embedding(Tape<S>&, std::span<const std::int32_t>, std::size_t, std::size_t,         \
                               const Tensor<S>&);                                                          \
  template Tensor<S> one_hot(std::span<const std::int32_t>, std::size_t, std::size_t, std::size_t);

TCNLAB_INSTANTIATE_HEADS(float)
TCNLAB_INSTANTIATE_HEADS(double)

}  // namespace tcnlab::nn

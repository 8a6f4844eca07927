#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "tcnlab/nn/params.hpp"
#include "tcnlab/ops.hpp"

namespace tcnlab::nn {

/// Affine map y = W x + b applied to [B, in] or, per time step, to [B, in, T].
/// w: [out, in], b: [out].
template <typename S>
Tensor<S> linear(Tape<S>& tape, const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b);

/// Last time step of [B, C, T] as [B, C].
template <typename S>
Tensor<S> select_last_step(Tape<S>& tape, const Tensor<S>& x) {
  if (x.rank() != 3 || x.dim(2) == 0) {
    throw ShapeError("select_last_step expects non-empty [B, C, T], got " + shape_str(x.shape()));
  }
  return time_slice(tape, x, x.dim(2) - 1);
}

/// Row lookup: tokens [B, T] into table [V, E] gives [B, E, T]. Throws
/// DomainError for tokens outside [0, V).
template <typename S>
Tensor<S> embedding(Tape<S>& tape, std::span<const std::int32_t> tokens, std::size_t batch, std::size_t len,
                    const Tensor<S>& table);

/// One-hot encoding of tokens [B, T] as [B, classes, T]. Not differentiable.
template <typename S>
Tensor<S> one_hot(std::span<const std::int32_t> tokens, std::size_t batch, std::size_t len, std::size_t classes);

template <typename S>
struct Linear {
  Tensor<S> w;  // [out, in]
  Tensor<S> b;  // [out]

  Linear() = default;
  Linear(std::size_t in, std::size_t out) : w({out, in}), b({out}) {}

  void register_params(ParamStore<S>& store, const std::string& prefix) const {
    store.add(prefix + ".w", w);
    store.add(prefix + ".bias", b);
  }
  Tensor<S> forward(Tape<S>& tape, const Tensor<S>& x) const { return linear(tape, x, w, b); }
};

}  // namespace tcnlab::nn

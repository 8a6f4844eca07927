#pragma once

// Differentiable primitives. Every op takes the tape first, records its
// gradient rule when any input requires a gradient, and returns a fresh
// tensor. Layouts are row-major: sequences are [batch, channels, time].

#include <cstdint>
#include <span>
#include <vector>

#include "tcnlab/rng.hpp"
#include "tcnlab/tape.hpp"
#include "tcnlab/tensor.hpp"

namespace tcnlab {

enum class BinaryOp { kAdd, kSub, kMul };
enum class Activation { kRelu, kSigmoid, kTanh };

/// Dilated causal convolution.
///
///   out[b, o, s] = bias[o] + sum_{c, i} w[o, c, i] * x[b, c, s - d*i]
///
/// x: [B, Cin, T], w: [Cout, Cin, k], bias: [Cout] or undefined. Tap i looks
/// back d*i steps; positions before the sequence start read as zero, so the
/// output has the same length as the input.
template <typename S>
Tensor<S> conv1d_causal(Tape<S>& tape, const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias,
                        std::size_t dilation);

/// [m, p] x [p, q] -> [m, q].
template <typename S>
Tensor<S> matmul(Tape<S>& tape, const Tensor<S>& a, const Tensor<S>& b);

/// Pointwise binary op. `b` either matches `a` exactly or matches a trailing
/// suffix of a's shape, in which case it is repeated along a's leading dims
/// (bias-style expansion). Both operands receive gradients.
template <typename S>
Tensor<S> elementwise(Tape<S>& tape, BinaryOp op, const Tensor<S>& a, const Tensor<S>& b);

template <typename S>
Tensor<S> add(Tape<S>& tape, const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(tape, BinaryOp::kAdd, a, b);
}
template <typename S>
Tensor<S> sub(Tape<S>& tape, const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(tape, BinaryOp::kSub, a, b);
}
template <typename S>
Tensor<S> mul(Tape<S>& tape, const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(tape, BinaryOp::kMul, a, b);
}

template <typename S>
Tensor<S> activation(Tape<S>& tape, Activation kind, const Tensor<S>& x);

template <typename S>
Tensor<S> relu(Tape<S>& tape, const Tensor<S>& x) {
  return activation(tape, Activation::kRelu, x);
}
template <typename S>
Tensor<S> sigmoid(Tape<S>& tape, const Tensor<S>& x) {
  return activation(tape, Activation::kSigmoid, x);
}
template <typename S>
Tensor<S> tanh(Tape<S>& tape, const Tensor<S>& x) {
  return activation(tape, Activation::kTanh, x);
}

/// Sum of all elements as a scalar.
template <typename S>
Tensor<S> sum(Tape<S>& tape, const Tensor<S>& x);

/// Mean of all elements as a scalar.
template <typename S>
Tensor<S> mean(Tape<S>& tape, const Tensor<S>& x);

/// Copy with a new shape of equal element count.
template <typename S>
Tensor<S> reshape(Tape<S>& tape, const Tensor<S>& x, Shape shape);

/// Column block [B, start:start+len] of a [B, N] matrix.
template <typename S>
Tensor<S> slice_cols(Tape<S>& tape, const Tensor<S>& x, std::size_t start, std::size_t len);

/// x[:, :, t] of a [B, C, T] tensor as [B, C].
template <typename S>
Tensor<S> time_slice(Tape<S>& tape, const Tensor<S>& x, std::size_t t);

/// Stacks T tensors of shape [B, C] into [B, C, T].
template <typename S>
Tensor<S> stack_time(Tape<S>& tape, std::span<const Tensor<S>> steps);

// Losses. All return scalars averaged over the batch and, for per-step
// inputs, over time steps.

/// Mean squared error over all elements.
template <typename S>
Tensor<S> mse(Tape<S>& tape, const Tensor<S>& pred, const Tensor<S>& target);

/// Softmax cross entropy. logits: [B, C] with labels [B], or [B, C, T] with
/// labels [B, T] (row-major). Labels must lie in [0, C).
template <typename S>
Tensor<S> cross_entropy(Tape<S>& tape, const Tensor<S>& logits, std::span<const std::int32_t> labels);

/// Independent-Bernoulli negative log-likelihood from logits [B, K, T] and
/// 0/1 targets of the same shape. Summed over K, averaged over B and T.
template <typename S>
Tensor<S> bernoulli_nll(Tape<S>& tape, const Tensor<S>& logits, const Tensor<S>& targets);

/// w = g * v / ||v|| with the norm taken per output channel (dim 0 of v).
/// Throws DomainError if some channel has ||v|| < 1e-12.
template <typename S>
Tensor<S> weight_norm(Tape<S>& tape, const Tensor<S>& v, const Tensor<S>& g);

/// Zeros whole (batch, channel) rows of x: [B, C, T] (or [B, C]) with
/// probability p and rescales survivors by 1/(1-p). Identity when not
/// training or p == 0.
template <typename S>
Tensor<S> channel_dropout(Tape<S>& tape, const Tensor<S>& x, double p, bool training, Rng& rng);

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the applied factor (1 when no clipping happened).
template <typename S>
S clip_grad_global_norm(std::span<Tensor<S>> params, S max_norm);

/// Global L2 norm of the gradients of `params`.
template <typename S>
S grad_global_norm(std::span<const Tensor<S>> params);

}  // namespace tcnlab

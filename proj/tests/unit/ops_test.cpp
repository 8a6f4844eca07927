#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "tcnlab/ops.hpp"

namespace tcnlab {
namespace {

using T = Tensor<double>;

T seq(std::vector<double> v) {
  const std::size_t n = v.size();
  return T({1, 1, n}, std::move(v));
}

std::vector<double> values(const T& t) { return {t.data().begin(), t.data().end()}; }

TEST(Conv1dCausal, IdentityKernel) {
  Tape<double> tape;
  const T y = conv1d_causal(tape, seq({1, 2, 3}), T({1, 1, 1}, {1.0}), T(), 1);
  EXPECT_EQ(values(y), (std::vector<double>{1, 2, 3}));
}

TEST(Conv1dCausal, TwoTapsDilationOne) {
  Tape<double> tape;
  const T y = conv1d_causal(tape, seq({1, 2, 3}), T({1, 1, 2}, {1.0, 1.0}), T({1}, {0.0}), 1);
  EXPECT_EQ(values(y), (std::vector<double>{1, 3, 5}));
}

TEST(Conv1dCausal, TwoTapsDilationTwo) {
  Tape<double> tape;
  const T y = conv1d_causal(tape, seq({1, 2, 3}), T({1, 1, 2}, {1.0, 1.0}), T({1}, {0.0}), 2);
  EXPECT_EQ(values(y), (std::vector<double>{1, 2, 4}));
}

TEST(Conv1dCausal, TapOrderLooksBack) {
  // Tap 1 reads x[t - d], so weight [0, 1] is a pure delay.
  Tape<double> tape;
  const T y = conv1d_causal(tape, seq({1, 2, 3, 4}), T({1, 1, 2}, {0.0, 1.0}), T(), 1);
  EXPECT_EQ(values(y), (std::vector<double>{0, 1, 2, 3}));
}

TEST(Conv1dCausal, IsLinearInInput) {
  Rng rng(7);
  T a({2, 3, 9}), b({2, 3, 9}), w({4, 3, 3});
  for (auto* t : {&a, &b, &w})
    for (double& v : t->data()) v = uniform01(rng) - 0.5;
  Tape<double> tape(Tape<double>::Mode::kInference);
  const T ya = conv1d_causal(tape, a, w, T(), 2);
  const T yb = conv1d_causal(tape, b, w, T(), 2);
  const T yab = conv1d_causal(tape, add(tape, a, b), w, T(), 2);
  for (std::size_t i = 0; i < yab.numel(); ++i) EXPECT_NEAR(yab.data()[i], ya.data()[i] + yb.data()[i], 1e-12);
}

TEST(Conv1dCausal, RejectsChannelMismatch) {
  Tape<double> tape;
  EXPECT_THROW(conv1d_causal(tape, T({1, 2, 4}), T({1, 3, 2}), T(), 1), ShapeError);
}

TEST(Matmul, IdentityAndHandComputed) {
  Tape<double> tape;
  const T m({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(values(matmul(tape, T({2, 2}, {1, 0, 0, 1}), m)), values(m));
  EXPECT_EQ(matmul(tape, T({1, 2}, {1, 2}), T({2, 1}, {3, 4})).item(), 11.0);
}

TEST(Matmul, GradientOfSumIsOtherOperand) {
  Tape<double> tape;
  const T a({1, 2}, {1, 2});
  const T b({2, 1}, {3, 4});
  a.set_requires_grad(true);
  T loss = sum(tape, matmul(tape, a, b));
  tape.backward(loss);
  EXPECT_EQ(std::vector<double>(a.grad().begin(), a.grad().end()), (std::vector<double>{3, 4}));
}

TEST(Elementwise, HandValues) {
  Tape<double> tape;
  const T x({3}, {1, -2, 5});
  EXPECT_EQ(values(add(tape, x, T({3}))), values(x));
  EXPECT_EQ(values(mul(tape, T({2}, {2, 3}), T({2}, {4, 5}))), (std::vector<double>{8, 15}));
  EXPECT_EQ(values(sub(tape, x, x)), (std::vector<double>{0, 0, 0}));
}

TEST(Elementwise, TrailingSuffixBroadcast) {
  Tape<double> tape;
  const T y = add(tape, T({2, 2}, {1, 2, 3, 4}), T({2}, {10, 20}));
  EXPECT_EQ(values(y), (std::vector<double>{11, 22, 13, 24}));
  EXPECT_THROW(add(tape, T({2, 2}), T({3})), ShapeError);
}

TEST(Activation, HandValues) {
  Tape<double> tape;
  EXPECT_EQ(values(relu(tape, T({3}, {-1, 0, 2}))), (std::vector<double>{0, 0, 2}));
  EXPECT_EQ(sigmoid(tape, T::scalar(0)).item(), 0.5);
}

TEST(Activation, TanhSlopeAtZeroByFiniteDifference) {
  const double h = 1e-6;
  Tape<double> probe(Tape<double>::Mode::kInference);
  const double fd = (tanh(probe, T::scalar(h)).item() - tanh(probe, T::scalar(-h)).item()) / (2 * h);
  Tape<double> tape;
  T x = T::scalar(0);
  x.set_requires_grad(true);
  T y = tanh(tape, x);
  tape.backward(y);
  EXPECT_NEAR(x.grad()[0], fd, 1e-9);
  EXPECT_NEAR(x.grad()[0], 1.0, 1e-9);
}

TEST(Losses, MseOfIdenticalIsZero) {
  Tape<double> tape;
  const T x({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(mse(tape, x, x).item(), 0.0);
}

TEST(Losses, UniformLogitsCrossEntropyIsLogClasses) {
  Tape<double> tape;
  const std::vector<std::int32_t> labels{0, 3, 7, 5};
  EXPECT_NEAR(cross_entropy(tape, T({4, 8}), labels).item(), std::log(8.0), 1e-12);
  EXPECT_THROW(cross_entropy(tape, T({4, 8}), std::vector<std::int32_t>{0, 1, 2, 8}), DomainError);
}

TEST(Losses, ZeroLogitBernoulliIsKeysTimesLn2) {
  Tape<double> tape;
  Rng rng(3);
  T targets({2, 88, 5});
  for (double& v : targets.data()) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;
  EXPECT_NEAR(bernoulli_nll(tape, T({2, 88, 5}), targets).item(), 88 * std::log(2.0), 1e-9);
}

TEST(Backward, SumGivesOnes) {
  Tape<double> tape;
  T x({2, 3}, {1, 2, 3, 4, 5, 6});
  x.set_requires_grad(true);
  T loss = sum(tape, x);
  tape.backward(loss);
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SumOfSquaresGivesTwiceInput) {
  Tape<double> tape;
  T x({4}, {1, -2, 0.5, 3});
  x.set_requires_grad(true);
  T loss = sum(tape, mul(tape, x, x));
  tape.backward(loss);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(x.grad()[i], 2 * x.data()[i]);
}

TEST(Backward, RejectsNonScalarAndSecondCall) {
  Tape<double> tape;
  T x({2}, {1, 2});
  x.set_requires_grad(true);
  T y = mul(tape, x, x);
  EXPECT_THROW(tape.backward(y), ContractError);
  T loss = sum(tape, y);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), ContractError);
}

TEST(Backward, InferenceTapeRecordsNothing) {
  Tape<double> tape(Tape<double>::Mode::kInference);
  T x({2}, {1, 2});
  x.set_requires_grad(true);
  const T y = sum(tape, mul(tape, x, x));
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Backward, ReplayIsBitIdentical) {
  auto run = [] {
    Rng rng(11);
    T x({2, 3, 6}), w({3, 3, 2});
    for (auto* t : {&x, &w})
      for (double& v : t->data()) v = uniform01(rng) - 0.5;
    w.set_requires_grad(true);
    Tape<double> tape;
    T loss = mean(tape, tanh(tape, conv1d_causal(tape, x, w, T(), 2)));
    tape.backward(loss);
    std::vector<double> out = values(loss);
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(WeightNorm, UnitDirectionWithUnitGainIsIdentity) {
  Tape<double> tape;
  const T v({1, 2, 1}, {0.6, 0.8});
  EXPECT_EQ(values(weight_norm(tape, v, T({1}, {1.0}))), values(v));
}

TEST(WeightNorm, ChannelNormEqualsGain) {
  Rng rng(5);
  T v({3, 2, 4});
  for (double& x : v.data()) x = uniform01(rng) - 0.5;
  const T g({3}, {0.5, -2.0, 3.0});
  Tape<double> tape;
  const T w = weight_norm(tape, v, g);
  for (std::size_t o = 0; o < 3; ++o) {
    double sq = 0;
    for (std::size_t i = 0; i < 8; ++i) sq += w.data()[o * 8 + i] * w.data()[o * 8 + i];
    EXPECT_NEAR(std::sqrt(sq), std::abs(g.data()[o]), 1e-12);
  }
}

TEST(WeightNorm, ZeroDirectionThrows) {
  Tape<double> tape;
  EXPECT_THROW(weight_norm(tape, T({2, 1, 2}, {1, 0, 0, 0}), T({2}, {1, 1})), DomainError);
}

TEST(ChannelDropout, IdentityWhenOff) {
  Rng rng(1);
  Tape<double> tape;
  const T x({2, 3, 4}, 1.5);
  EXPECT_EQ(values(channel_dropout(tape, x, 0.0, true, rng)), values(x));
  EXPECT_EQ(values(channel_dropout(tape, x, 0.5, false, rng)), values(x));
}

TEST(ChannelDropout, ZerosWholeChannels) {
  Rng rng(2);
  Tape<double> tape;
  const T y = channel_dropout(tape, T({4, 8, 5}, 1.0), 0.5, true, rng);
  for (std::size_t row = 0; row < 32; ++row) {
    const double first = y.data()[row * 5];
    EXPECT_TRUE(first == 0.0 || first == 2.0);
    for (std::size_t t = 1; t < 5; ++t) EXPECT_EQ(y.data()[row * 5 + t], first);
  }
}

TEST(ChannelDropout, ExpectationMatchesInput) {
  Rng rng(3);
  Tape<double> tape(Tape<double>::Mode::kInference);
  const T y = channel_dropout(tape, T({20000, 4, 1}, 1.0), 0.3, true, rng);
  const double m = std::accumulate(y.data().begin(), y.data().end(), 0.0) / double(y.numel());
  EXPECT_NEAR(m, 1.0, 0.02);
}

TEST(ClipGradNorm, NoScalingBelowThreshold) {
  T p({2}, {0, 0});
  p.grad()[0] = 0.3;
  p.grad()[1] = 0.4;
  std::vector<T> ps{p};
  EXPECT_EQ(clip_grad_global_norm<double>(ps, 1.0), 1.0);
  EXPECT_EQ(p.grad()[0], 0.3);
}

TEST(ClipGradNorm, ScalesThreeFourToUnit) {
  T p({2}, {0, 0});
  p.grad()[0] = 3;
  p.grad()[1] = 4;
  std::vector<T> ps{p};
  clip_grad_global_norm<double>(ps, 1.0);
  EXPECT_NEAR(p.grad()[0], 0.6, 1e-12);
  EXPECT_NEAR(p.grad()[1], 0.8, 1e-12);
}

TEST(ClipGradNorm, PostClipNormIsMinOfNormAndThreshold) {
  Rng rng(4);
  for (double max_norm : {0.1, 1.0, 100.0}) {
    T a({5}), b({3, 2});
    for (auto* t : {&a, &b})
      for (double& g : t->grad()) g = uniform01(rng) * 4 - 2;
    std::vector<T> ps{a, b};
    const double before = grad_global_norm<double>(ps);
    clip_grad_global_norm<double>(ps, max_norm);
    EXPECT_NEAR(grad_global_norm<double>(ps), std::min(before, max_norm), 1e-6);
  }
}

TEST(FiniteChecks, NanOutputThrowsWhenEnabled) {
  set_finite_checks(true);
  Tape<double> tape;
  EXPECT_THROW(mul(tape, T({1}, {INFINITY}), T({1}, {0.0})), NumericalError);
  set_finite_checks(false);
}

}  // namespace
}  // namespace tcnlab

#include <cmath>
#include <cstring>
#include <sstream>

#include "tcnlab/nn/tcn.hpp"
#include "tcnlab/verify.hpp"

namespace tcnlab::verify {

namespace {

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

std::vector<CheckResult> causality_suite(std::size_t num_specs, std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng = make_rng(seed, Stream::kVerify);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  for (std::size_t s = 0; s < num_specs; ++s) {
    nn::TcnSpec spec;
    spec.kernel_size = pick(2, 8);
    const std::size_t levels = pick(1, 6);
    spec.input_ch = pick(1, 3);
    for (std::size_t l = 0; l < levels; ++l) spec.level_channels.push_back(pick(2, 4));
    spec.use_gating = pick(0, 3) == 0;
    const std::size_t rf = nn::receptive_field(spec.kernel_size, levels);
    const std::size_t len = rf + 8;

    nn::Tcn<double> tcn(spec);
    // Large weights and positive biases keep most ReLUs open, so a change at
    // the edge of the receptive field reaches the output.
    tcn.init(rng, 0.5);
    nn::ParamStore<double> store;
    tcn.register_params(store, "tcn");
    for (auto& p : store) {
      if (p.name.ends_with(".bias")) {
        for (double& v : p.tensor.data()) v = 0.5 + uniform01(rng);
      }
    }

    Tensor<double> x({1, spec.input_ch, len});
    for (double& v : x.data()) v = 2.0 * uniform01(rng) - 1.0;
    Rng unused(0);
    auto run = [&](const Tensor<double>& input) {
      Tape<double> tape(Tape<double>::Mode::kInference);
      return tcn.forward(tape, input, false, unused);
    };
    const Tensor<double> base = run(x);
    const std::size_t out_ch = spec.output_ch();

    // Perturb one time step near the start so both the past and the region
    // beyond the receptive field exist.
    const std::size_t t_star = pick(1, 7);
    Tensor<double> xp = x.clone();
    for (std::size_t c = 0; c < spec.input_ch; ++c) xp.data()[c * len + t_star] += 1.0;
    const Tensor<double> moved = run(xp);

    std::size_t past_changes = 0, far_changes = 0;
    for (std::size_t c = 0; c < out_ch; ++c) {
      for (std::size_t t = 0; t < len; ++t) {
        const bool same = bitwise_equal(base.data()[c * len + t], moved.data()[c * len + t]);
        if (t < t_star && !same) ++past_changes;
        if (t >= t_star + rf && !same) ++far_changes;
      }
    }

    // Reach check: with every weight and bias positive all units stay in
    // their linear regime, so the single path through the outermost taps
    // carries a huge perturbation to the last output inside the field.
    for (auto& p : store)
      for (double& v : p.tensor.data()) v = std::abs(v) + 0.01;
    for (double& v : x.data()) v = std::abs(v);
    const Tensor<double> pos_base = run(x);
    Tensor<double> xq = x.clone();
    for (std::size_t c = 0; c < spec.input_ch; ++c) xq.data()[c * len + t_star] += 1e12;
    const Tensor<double> pos_moved = run(xq);
    bool edge_changed = false;
    for (std::size_t c = 0; c < out_ch; ++c) {
      const std::size_t at = c * len + t_star + rf - 1;
      if (!bitwise_equal(pos_base.data()[at], pos_moved.data()[at])) edge_changed = true;
      for (std::size_t t = t_star + rf; t < len; ++t)
        if (!bitwise_equal(pos_base.data()[c * len + t], pos_moved.data()[c * len + t])) ++far_changes;
    }

    std::ostringstream name;
    name << "spec" << s << "(k=" << spec.kernel_size << ",n=" << levels << (spec.use_gating ? ",gated" : "")
         << ",rf=" << rf << ")";
    std::ostringstream detail;
    detail << "past_changes=" << past_changes << " beyond_rf_changes=" << far_changes
           << " edge_changed=" << (edge_changed ? "yes" : "no");
    out.push_back({name.str(), past_changes == 0 && far_changes == 0 && edge_changed, detail.str()});
  }
  return out;
}

}  // namespace tcnlab::verify
